#include "qrw/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "qrw/digest.hpp"
#include "qrw/error.hpp"
#include "qrw/stemmer.hpp"

namespace qrw {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t get_size(const KeyValueConfig& kv, const char* key, std::size_t fallback) {
  const long long v = kv.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw InputError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("write failed: " + p.string());
}

std::string tabs_to_assignments(std::string text) {
  std::replace(text.begin(), text.end(), '\t', '=');
  return text;
}

std::vector<ParallelPair> select(std::span<const ParallelPair> all,
                                 std::span<const std::size_t> idx) {
  std::vector<ParallelPair> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------- configuration

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig c;
  c.input = kv.get_string("input", "");
  c.work_dir = kv.get_string("work_dir", "work");
  c.prefilter = PrefilterConfig::from_config(kv);
  c.simfilter = SimFilterConfig::from_config(kv);
  c.dev_size = get_size(kv, "dev_size", c.dev_size);
  c.dev_fraction = kv.get_double("dev_fraction", c.dev_fraction);
  if (!(c.dev_fraction >= 0.0 && c.dev_fraction < 1.0)) {
    throw InputError("dev_fraction must lie in [0,1)");
  }
  c.align_iterations = static_cast<int>(kv.get_int("align_iterations", c.align_iterations));
  if (c.align_iterations < 1) throw InputError("align_iterations must be >= 1");
  c.max_phrase_len = get_size(kv, "max_phrase_len", c.max_phrase_len);
  if (c.max_phrase_len < 1) throw InputError("max_phrase_len must be >= 1");
  c.prune_threshold = get_size(kv, "prune_threshold", c.prune_threshold);
  c.lm_discount = kv.get_double("lm_discount", c.lm_discount);
  if (!(c.lm_discount > 0.0 && c.lm_discount < 1.0)) {
    throw InputError("lm_discount must lie in (0,1)");
  }
  c.mert.max_iters = static_cast<int>(kv.get_int("mert_max_iters", c.mert.max_iters));
  if (c.mert.max_iters < 0) throw InputError("mert_max_iters must be >= 0");
  c.mert.nbest = get_size(kv, "mert_nbest", c.mert.nbest);
  if (c.mert.nbest < 1) throw InputError("mert_nbest must be >= 1");
  c.mert.random_directions =
      static_cast<int>(kv.get_int("mert_random_directions", c.mert.random_directions));
  if (c.mert.random_directions < 0) throw InputError("mert_random_directions must be >= 0");
  c.mert.min_gain = kv.get_double("mert_min_gain", c.mert.min_gain);
  c.decode = DecodeParams::from_config(kv, c.decode);
  c.initial_weights = FeatureWeights::from_config(kv, c.initial_weights);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  if (c.threads < 1) throw InputError("threads must be >= 1");
  c.resume = kv.get_bool("resume", c.resume);
  return c;
}

KeyValueConfig PipelineConfig::to_config() const {
  KeyValueConfig kv;
  kv.set("input", input.string());
  kv.set("work_dir", work_dir.string());
  const auto& p = prefilter;
  kv.set("max_rank", std::to_string(p.max_rank));
  kv.set("min_chars", std::to_string(p.min_chars));
  kv.set("min_tokens", std::to_string(p.min_tokens));
  kv.set("max_token_diff", std::to_string(p.max_token_diff));
  kv.set("max_token_run", std::to_string(p.max_token_run));
  kv.set("min_alnum_ratio", fmt(p.min_alnum_ratio));
  kv.set("min_arabic_ratio", fmt(p.min_arabic_ratio));
  kv.set("site_blocklist", p.site_blocklist.string());
  std::string patterns;
  for (const auto& u : p.url_patterns) patterns += (patterns.empty() ? "" : " ") + u;
  kv.set("url_patterns", patterns);
  kv.set("norm.strip_diacritics", p.norm.strip_diacritics ? "true" : "false");
  kv.set("norm.strip_tatweel", p.norm.strip_tatweel ? "true" : "false");
  kv.set("norm.unicode_form", std::to_string(static_cast<int>(p.norm.unicode_form)));
  kv.set("norm.lowercase_latin", p.norm.lowercase_latin ? "true" : "false");
  kv.set("norm.arabic_letter_unification", p.norm.arabic_letter_unification ? "true" : "false");
  const auto& s = simfilter;
  kv.set("min_jaccard", fmt(s.min_jaccard));
  kv.set("min_cosine", fmt(s.min_cosine));
  kv.set("max_cosine", fmt(s.max_cosine));
  kv.set("provider", s.provider == ProviderKind::kRemote ? "remote" : "fallback");
  kv.set("embed_url", s.embed_url);
  kv.set("fallback_dim", std::to_string(s.fallback_dim));
  kv.set("embed_fallback_on_error", s.fallback_on_provider_error ? "true" : "false");
  kv.set("dev_size", std::to_string(dev_size));
  kv.set("dev_fraction", fmt(dev_fraction));
  kv.set("align_iterations", std::to_string(align_iterations));
  kv.set("max_phrase_len", std::to_string(max_phrase_len));
  kv.set("prune_threshold", std::to_string(prune_threshold));
  kv.set("lm_discount", fmt(lm_discount));
  kv.set("mert_max_iters", std::to_string(mert.max_iters));
  kv.set("mert_nbest", std::to_string(mert.nbest));
  kv.set("mert_random_directions", std::to_string(mert.random_directions));
  kv.set("mert_min_gain", fmt(mert.min_gain));
  std::string tunable;
  for (bool t : mert.tunable) tunable += t ? '1' : '0';
  kv.set("mert_tunable", tunable);
  decode.write_to(kv);
  initial_weights.write_to(kv);
  kv.set("seed", std::to_string(seed));
  kv.set("threads", std::to_string(threads));
  kv.set("resume", resume ? "true" : "false");
  return kv;
}

// ---------------------------------------------------------------- stages

PrepResult run_prep(const fs::path& input, const fs::path& out_dir,
                    const PrefilterConfig& prefilter, const SimFilterConfig& simfilter) {
  fs::create_directories(out_dir);
  PrepResult r;
  const auto records = load_raw_pairs(input, &r.load_stats);
  auto pre = run_prefilter(records, prefilter);
  r.prefilter_report = std::move(pre.report);
  if (r.load_stats.malformed) r.prefilter_report.add_note("malformed_rows", r.load_stats.malformed);
  r.prefilter_report.save(out_dir / "prefilter.report");
  if (pre.kept.empty()) {
    throw StageError("prefilter", "all " + std::to_string(records.size()) + " records of " +
                                      input.string() + " were dropped; see " +
                                      (out_dir / "prefilter.report").string());
  }

  auto provider = make_provider(simfilter);
  ArabicLightStemmer stemmer;
  auto sim = run_simfilter(pre.kept, simfilter, *provider, stemmer);
  r.simfilter_report = std::move(sim.report);
  r.simfilter_report.save(out_dir / "simfilter.report");
  if (sim.kept.empty()) {
    throw StageError("simfilter", "all " + std::to_string(pre.kept.size()) +
                                      " pairs were dropped; see " +
                                      (out_dir / "simfilter.report").string());
  }
  r.pairs = std::move(sim.kept);

  std::vector<ParallelPair> parallel;
  parallel.reserve(r.pairs.size());
  for (const auto& p : r.pairs) parallel.emplace_back(p.query_tokens, p.title_tokens);
  write_parallel(parallel, out_dir / "corpus.src", out_dir / "corpus.tgt");
  return r;
}

DevSplit split_dev(std::size_t n, std::size_t dev_size, double dev_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Unbiased draw from [0, i) by rejection.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i - 1], idx[r % bound]);
  }
  const auto cap = static_cast<std::size_t>(std::floor(static_cast<double>(n) * dev_fraction));
  const std::size_t n_dev = std::min(dev_size, cap);
  DevSplit s;
  s.dev.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_dev));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_dev), idx.end());
  std::sort(s.dev.begin(), s.dev.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

AlignResult align_corpus(std::span<const ParallelPair> corpus, int iterations, int threads) {
  Model1Options opts;
  opts.iterations = iterations;
  opts.threads = threads;
  AlignResult r;
  r.forward = train_model1(corpus, opts).table;
  std::vector<ParallelPair> swapped;
  swapped.reserve(corpus.size());
  for (const auto& [s, t] : corpus) swapped.emplace_back(t, s);
  r.backward = train_model1(swapped, opts).table;
  r.alignments.reserve(corpus.size());
  for (const auto& [s, t] : corpus) {
    r.alignments.push_back(
        symmetrize(viterbi_align(r.forward, s, t), viterbi_align(r.backward, t, s)));
  }
  return r;
}

PhraseTable build_phrase_table(std::span<const ParallelPair> corpus,
                               std::span<const AlignmentMatrix> alignments,
                               const TranslationTable& forward, const TranslationTable& backward,
                               std::size_t max_len, int threads) {
  const auto counts = count_phrases(corpus, alignments, max_len, threads);
  return score_phrase_table(counts, forward, backward);
}

lm::TrigramModel train_lm(std::span<const TokenSeq> sentences, double discount) {
  return lm::estimate_kneser_ney(lm::count_ngrams(sentences), discount);
}

// --------------------------------------------------------------- train_all

namespace {

// Whether a setting can change the artifacts of a stage. Filter and
// normalization keys belong to prep.
bool setting_affects(const std::string& key, const std::string& stage) {
  static const std::map<std::string, std::string> kOwner = {
      {"input", ""},          {"work_dir", ""},          {"threads", ""},
      {"resume", ""},         {"dev_size", "split"},     {"dev_fraction", "split"},
      {"align_iterations", "align"}, {"max_phrase_len", "phrases"},
      {"prune_threshold", "phrases"}, {"lm_discount", "lm"},
  };
  if (key == "seed") return stage == "split" || stage == "tune";
  if (const auto it = kOwner.find(key); it != kOwner.end()) return it->second == stage;
  KeyValueConfig decode_keys;
  DecodeParams{}.write_to(decode_keys);
  if (key.starts_with("mert_") || key.starts_with("weights.") || decode_keys.contains(key)) {
    return stage == "tune";
  }
  return stage == "prep";
}

}  // namespace

TrainResult train_all(const PipelineConfig& cfg, std::ostream* log) {
  if (cfg.input.empty()) throw InputError("no input corpus configured");
  const fs::path work = cfg.work_dir;
  fs::create_directories(work / "stamps");

  const auto settings_kv = cfg.to_config();
  auto settings_of = [&](const std::string& name) {
    KeyValueConfig kv;
    for (const auto& [k, v] : settings_kv.entries()) {
      if (setting_affects(k, name)) kv.set(k, v);
    }
    return kv.to_string();
  };

  TrainResult result;
  result.bundle_dir = work;
  auto W = [&](const char* name) { return work / name; };

  auto stage = [&](const std::string& name, const std::vector<fs::path>& inputs,
                   const std::vector<fs::path>& outputs, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path stamp = work / "stamps" / (name + ".stamp");
    std::string fp;
    try {
      std::string material = settings_of(name) + "\nstage=" + name + '\n';
      for (const auto& in : inputs) material += in.filename().string() + '=' + sha256_file(in) + '\n';
      fp = sha256_hex(material);
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    bool fresh = cfg.resume && fs::exists(stamp) && read_file(stamp) == fp;
    for (const auto& out : outputs) fresh = fresh && fs::exists(out);
    if (fresh) {
      result.timings.push_back({name, 0.0, true});
      if (log) *log << "stage " << name << ": up to date\n";
      return;
    }
    fs::remove(stamp);
    if (log) *log << "stage " << name << ": running\n";
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, std::string(e.what()) + " (artifacts kept in " + work.string() +
                                 ")");
    }
    write_file(stamp, fp);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.timings.push_back({name, secs, false});
  };

  if (!fs::exists(cfg.input)) {
    throw StageError("prep", "cannot read input corpus " + cfg.input.string());
  }

  stage("prep", {cfg.input},
        {W("corpus.src"), W("corpus.tgt"), W("prefilter.report"), W("simfilter.report")},
        [&] { run_prep(cfg.input, work, cfg.prefilter, cfg.simfilter); });

  stage("split", {W("corpus.src"), W("corpus.tgt")},
        {W("train.src"), W("train.tgt"), W("dev.src"), W("dev.tgt")}, [&] {
          const auto all = read_parallel(W("corpus.src"), W("corpus.tgt"));
          const auto split = split_dev(all.size(), cfg.dev_size, cfg.dev_fraction, cfg.seed);
          if (split.train.empty()) throw StageError("split", "no training pairs remain");
          write_parallel(select(all, split.train), W("train.src"), W("train.tgt"));
          write_parallel(select(all, split.dev), W("dev.src"), W("dev.tgt"));
        });

  stage("align", {W("train.src"), W("train.tgt")},
        {W("lex.f2e"), W("lex.e2f"), W("aligned.grow-diag-final-and")}, [&] {
          const auto train = read_parallel(W("train.src"), W("train.tgt"));
          const auto a = align_corpus(train, cfg.align_iterations, cfg.threads);
          a.forward.save(W("lex.f2e"));
          a.backward.save(W("lex.e2f"));
          write_alignments(W("aligned.grow-diag-final-and"), a.alignments);
        });

  stage("phrases",
        {W("train.src"), W("train.tgt"), W("lex.f2e"), W("lex.e2f"),
         W("aligned.grow-diag-final-and")},
        {W("phrase-table.full.txt"), W("phrase-table.txt"), W("prune.report")}, [&] {
          const auto train = read_parallel(W("train.src"), W("train.tgt"));
          const auto alignments = read_alignments(W("aligned.grow-diag-final-and"), train);
          const auto table =
              build_phrase_table(train, alignments, TranslationTable::load(W("lex.f2e")),
                                 TranslationTable::load(W("lex.e2f")), cfg.max_phrase_len,
                                 cfg.threads);
          table.save(W("phrase-table.full.txt"));
          const auto pruned = prune(table, cfg.prune_threshold);
          pruned.table.save(W("phrase-table.txt"));
          write_file(W("prune.report"), "removed\t" + std::to_string(pruned.removed) +
                                            "\nretained\t" + std::to_string(pruned.retained) +
                                            '\n');
        });

  stage("lm", {W("train.tgt")}, {W("lm.bin")}, [&] {
    train_lm(read_sentences(W("train.tgt")), cfg.lm_discount).save_binary(W("lm.bin"));
  });

  stage("tune", {W("phrase-table.txt"), W("lm.bin"), W("dev.src"), W("dev.tgt")},
        {W("weights.txt"), W("tune.log")}, [&] {
          ModelBundle bundle(PhraseTable::load(W("phrase-table.txt")),
                             lm::TrigramModel::load_binary(W("lm.bin")), cfg.initial_weights,
                             cfg.decode);
          const auto dev_pairs = read_parallel(W("dev.src"), W("dev.tgt"));
          std::vector<DevPair> dev;
          for (const auto& [q, t] : dev_pairs) dev.push_back({q, t});
          std::ofstream tlog(W("tune.log"), std::ios::binary | std::ios::trunc);
          KeyValueConfig out;
          if (dev.empty()) {
            tlog << "# seed\t" << cfg.seed << "\n# empty dev set; initial weights kept\n";
            cfg.initial_weights.write_to(out);
            out.set("mert.bleu", "0");
            out.set("mert.iterations", "0");
          } else {
            MertOptions mo = cfg.mert;
            mo.seed = cfg.seed;
            mo.threads = cfg.threads;
            auto fn = [&](std::span<const std::string> q, const FeatureWeights& w,
                          std::size_t n) { return bundle.decode(q, n, w); };
            const auto r = mert_tune(fn, dev, cfg.initial_weights, mo, &tlog);
            r.weights.write_to(out);
            out.set("mert.bleu", fmt(r.bleu));
            out.set("mert.iterations", std::to_string(r.iterations));
          }
          out.set("counts.dev_pairs", std::to_string(dev.size()));
          out.save(W("weights.txt"));
        });

  // Manifest is cheap and always rewritten.
  {
    const auto start = std::chrono::steady_clock::now();
    const auto tuned = KeyValueConfig::load(W("weights.txt"));
    KeyValueConfig m;
    m.set("artifact.phrase_table", "phrase-table.txt");
    m.set("artifact.lm", "lm.bin");
    m.set("sha256.phrase_table", sha256_file(W("phrase-table.txt")));
    m.set("sha256.lm", sha256_file(W("lm.bin")));
    m.set("sha256.input", sha256_file(cfg.input));
    m.set("sha256.train_src", sha256_file(W("train.src")));
    m.set("sha256.train_tgt", sha256_file(W("train.tgt")));
    m.set("sha256.dev_src", sha256_file(W("dev.src")));
    m.set("sha256.dev_tgt", sha256_file(W("dev.tgt")));
    const auto weights = FeatureWeights::from_config(tuned, cfg.initial_weights);
    weights.write_to(m);
    cfg.decode.write_to(m);
    m.set("seed", std::to_string(cfg.seed));
    m.set("mert.bleu", tuned.get_string("mert.bleu", "0"));
    m.set("mert.iterations", tuned.get_string("mert.iterations", "0"));
    m.set("counts.dev_pairs", tuned.get_string("counts.dev_pairs", "0"));
    const auto pruned = KeyValueConfig::parse(tabs_to_assignments(read_file(W("prune.report"))));
    const auto removed = pruned.get_int("removed", 0);
    const auto retained = pruned.get_int("retained", 0);
    m.set("counts.phrase_table_full", std::to_string(removed + retained));
    m.set("counts.phrase_table", std::to_string(retained));
    m.save(work / kManifestName);

    std::string timings;
    for (const auto& t : result.timings) {
      timings += t.stage + '\t' + (t.resumed ? std::string("resumed") : fmt(t.seconds)) + '\n';
    }
    timings += "manifest\t" +
               fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) +
               '\n';
    write_file(W("timings.txt"), timings);
    result.tuned_bleu = tuned.get_double("mert.bleu", 0.0);
    if (log) *log << "bundle written to " << work.string() << '\n';
  }
  return result;
}

}  // namespace qrw
