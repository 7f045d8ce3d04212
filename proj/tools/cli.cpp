#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qrw/align.hpp"
#include "qrw/bundle.hpp"
#include "qrw/config.hpp"
#include "qrw/error.hpp"
#include "qrw/lm.hpp"
#include "qrw/mert.hpp"
#include "qrw/phrase_table.hpp"
#include "qrw/pipeline.hpp"
#include "qrw/rewriter.hpp"

namespace qrw {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

// Precedence: --seed/--threads and --set over the config file over defaults.
KeyValueConfig resolve_config(const GlobalOptions& g) {
  KeyValueConfig kv;
  if (!g.config.empty()) {
    if (!fs::exists(g.config)) throw InputError("config file not found: " + g.config);
    try {
      kv = KeyValueConfig::load(g.config);
    } catch (const std::exception& e) {
      throw InputError("cannot load config " + g.config + ": " + e.what());
    }
  }
  for (const auto& o : g.overrides) kv.apply_override(o);
  if (g.seed) kv.set("seed", std::to_string(*g.seed));
  if (g.threads) kv.set("threads", std::to_string(*g.threads));
  return kv;
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void print_report(std::ostream& out, const std::string& title, const FilterReport& r) {
  out << "# " << title << '\n' << r.to_text();
}

int threads_of(const KeyValueConfig& kv) {
  const auto t = kv.get_int("threads", 1);
  if (t < 1) throw InputError("threads must be >= 1");
  return static_cast<int>(t);
}

// ------------------------------------------------------------ subcommands

int cmd_prep(const KeyValueConfig& kv, const std::string& input, const std::string& out_dir,
             std::ostream& out) {
  const auto pre = PrefilterConfig::from_config(kv);
  const auto sim = SimFilterConfig::from_config(kv);
  const auto r = run_prep(input, out_dir, pre, sim);
  print_report(out, "prefilter", r.prefilter_report);
  print_report(out, "simfilter", r.simfilter_report);
  out << "kept\t" << r.pairs.size() << '\n';
  return kExitOk;
}

int cmd_align(const KeyValueConfig& kv, const std::string& src, const std::string& tgt,
              const std::string& out_dir, std::ostream& out) {
  const int iterations = static_cast<int>(kv.get_int("align_iterations", 5));
  if (iterations < 1) throw InputError("align_iterations must be >= 1");
  const auto corpus = read_parallel(src, tgt);
  fs::create_directories(out_dir);
  const auto a = align_corpus(corpus, iterations, threads_of(kv));
  a.forward.save(fs::path(out_dir) / "lex.f2e");
  a.backward.save(fs::path(out_dir) / "lex.e2f");
  write_alignments(fs::path(out_dir) / "aligned.grow-diag-final-and", a.alignments);
  out << "pairs\t" << corpus.size() << "\niterations\t" << iterations << '\n';
  return kExitOk;
}

int cmd_extract(const KeyValueConfig& kv, const std::string& src, const std::string& tgt,
                const std::string& alignments, const std::string& f2e, const std::string& e2f,
                const std::string& out_path, std::ostream& out) {
  const auto max_len = kv.get_int("max_phrase_len", 5);
  if (max_len < 1) throw InputError("max_phrase_len must be >= 1");
  const auto corpus = read_parallel(src, tgt);
  const auto links = read_alignments(alignments, corpus);
  const auto table =
      build_phrase_table(corpus, links, TranslationTable::load(f2e), TranslationTable::load(e2f),
                         static_cast<std::size_t>(max_len), threads_of(kv));
  table.save(out_path);
  out << "entries\t" << table.size() << '\n';
  return kExitOk;
}

int cmd_prune(const KeyValueConfig& kv, const std::string& in_path, const std::string& out_path,
              std::ostream& out) {
  const auto threshold = kv.get_int("prune_threshold", 3);
  if (threshold < 0) throw InputError("prune_threshold must be >= 0");
  const auto r = prune(PhraseTable::load(in_path), static_cast<std::uint64_t>(threshold));
  r.table.save(out_path);
  out << "removed\t" << r.removed << "\nretained\t" << r.retained << '\n';
  return kExitOk;
}

int cmd_lm_train(const KeyValueConfig& kv, const std::string& text, const std::string& out_path,
                 const std::string& dump, std::ostream& out) {
  const double discount = kv.get_double("lm_discount", 0.75);
  if (!(discount > 0.0 && discount < 1.0)) throw InputError("lm_discount must lie in (0,1)");
  const auto sentences = read_sentences(text);
  const auto model = train_lm(sentences, discount);
  model.save_binary(out_path);
  if (!dump.empty()) {
    std::ofstream d(dump, std::ios::binary | std::ios::trunc);
    if (!d) throw IoError("cannot write " + dump);
    model.dump_text(d);
  }
  out << "sentences\t" << sentences.size() << "\nvocab\t" << model.vocab_size()
      << "\nbigram_entries\t" << model.bigram_entry_count() << "\ntrigram_entries\t"
      << model.trigram_entry_count() << '\n';
  return kExitOk;
}

int cmd_lm_bin(const std::string& model_path, const std::string& dump, bool score,
               std::istream& in, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto model = lm::TrigramModel::load_binary(model_path);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out << "vocab\t" << model.vocab_size() << "\nbigram_entries\t" << model.bigram_entry_count()
      << "\ntrigram_entries\t" << model.trigram_entry_count() << "\nload_ms\t" << fmt(ms, "%.3f")
      << '\n';
  if (!dump.empty()) {
    std::ofstream d(dump, std::ios::binary | std::ios::trunc);
    if (!d) throw IoError("cannot write " + dump);
    model.dump_text(d);
  }
  if (score) {
    std::string line;
    while (std::getline(in, line)) {
      out << fmt(model.sentence_logprob(tokenize(line)), "%.9g") << '\t' << line << '\n';
    }
  }
  return kExitOk;
}

int cmd_tune(const KeyValueConfig& kv, const std::string& table, const std::string& lm_path,
             const std::string& dev_src, const std::string& dev_tgt, const std::string& out_dir,
             std::ostream& out) {
  const auto pc = PipelineConfig::from_config(kv);
  ModelBundle bundle(PhraseTable::load(table), lm::TrigramModel::load_binary(lm_path),
                     pc.initial_weights, pc.decode);
  std::vector<DevPair> dev;
  for (const auto& [q, t] : read_parallel(dev_src, dev_tgt)) dev.push_back({q, t});
  if (dev.empty()) throw InputError("dev set is empty: " + dev_src);
  fs::create_directories(out_dir);
  std::ofstream log(fs::path(out_dir) / "tune.log", std::ios::binary | std::ios::trunc);
  MertOptions mo = pc.mert;
  mo.seed = pc.seed;
  mo.threads = pc.threads;
  auto fn = [&](std::span<const std::string> q, const FeatureWeights& w, std::size_t n) {
    return bundle.decode(q, n, w);
  };
  const auto r = mert_tune(fn, dev, pc.initial_weights, mo, &log);
  KeyValueConfig w;
  r.weights.write_to(w);
  w.set("mert.bleu", fmt(r.bleu, "%.17g"));
  w.set("mert.iterations", std::to_string(r.iterations));
  w.set("seed", std::to_string(pc.seed));
  w.save(fs::path(out_dir) / "weights.txt");
  out << "seed\t" << pc.seed << "\niterations\t" << r.iterations << "\nbleu\t" << fmt(r.bleu)
      << '\n';
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    out << "weights." << feature_names()[k] << '\t' << fmt(r.weights[k], "%.9g") << '\n';
  }
  return kExitOk;
}

int cmd_train_all(KeyValueConfig kv, const std::string& input, const std::string& work_dir,
                  std::ostream& out, std::ostream& err) {
  if (!input.empty()) kv.set("input", input);
  if (!work_dir.empty()) kv.set("work_dir", work_dir);
  const auto pc = PipelineConfig::from_config(kv);
  err << "seed\t" << pc.seed << '\n';
  const auto r = train_all(pc, &err);
  for (const auto& t : r.timings) {
    out << "time." << t.stage << '\t' << (t.resumed ? std::string("resumed") : fmt(t.seconds, "%.3f"))
        << '\n';
  }
  out << "seed\t" << pc.seed << "\nbundle\t" << r.bundle_dir.string() << '\n';
  return kExitOk;
}

void print_nbest(std::ostream& out, const RewriteResult& r) {
  for (std::size_t k = 0; k < r.nbest.size() && k < kIdentitySkipDepth; ++k) {
    out << (k + 1) << '\t' << fmt(r.nbest[k].score, "%.6f") << '\t' << r.nbest[k].surface
        << '\n';
  }
}

int cmd_rewrite(const std::string& bundle_dir, const std::optional<std::string>& query,
                bool nbest, std::istream& in, std::ostream& out, std::ostream& err) {
  const auto bundle = ModelBundle::load(bundle_dir);
  if (query) {
    const auto r = rewrite(*query, bundle);
    if (nbest) {
      print_nbest(out, r);
    } else {
      out << r.rewritten << '\n';
    }
    return kExitOk;
  }
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (nbest && !first) out << '\n';
    first = false;
    try {
      const auto r = rewrite(line, bundle);
      if (nbest) {
        print_nbest(out, r);
      } else {
        out << r.rewritten << '\n';
      }
    } catch (const InputError&) {
      if (!tokenize(line).empty()) err << "warning: nothing to rewrite in '" << line << "'\n";
      if (!nbest) out << '\n';
    }
  }
  return kExitOk;
}

int cmd_eval(const std::string& bundle_dir, const std::string& input, const std::string& out_path,
             std::ostream& out) {
  const auto bundle = ModelBundle::load(bundle_dir);
  const auto batch = load_labeled_queries(input);
  const auto report = evaluate_batch(batch, bundle);
  if (!out_path.empty()) {
    std::ofstream o(out_path, std::ios::binary | std::ios::trunc);
    if (!o) throw IoError("cannot write " + out_path);
    o << report.to_tsv();
  } else {
    out << report.to_tsv();
  }
  out << report.summary();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Monolingual phrase-based query rewriting toolkit", "qrw"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "key = value configuration file");
  app.add_option("--set", g.overrides, "key=value override (repeatable)");
  std::uint64_t seed = 42;
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default 42)");
  int threads = 1;
  auto* threads_opt = app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);

  std::string input, out_dir, src, tgt, alignments, f2e, e2f, out_path, model, dump, bundle_dir;
  std::string query;
  bool score = false, nbest = false;

  auto* prep = app.add_subcommand("prep", "prefilter and similarity filter a raw TSV");
  prep->add_option("--input", input, "query<TAB>title<TAB>rank file")->required();
  prep->add_option("--out-dir", out_dir, "output directory")->required();

  auto* align = app.add_subcommand("align", "IBM Model 1 both ways plus symmetrization");
  align->add_option("--src", src)->required();
  align->add_option("--tgt", tgt)->required();
  align->add_option("--out-dir", out_dir)->required();

  auto* extract = app.add_subcommand("extract", "extract and score phrase pairs");
  extract->add_option("--src", src)->required();
  extract->add_option("--tgt", tgt)->required();
  extract->add_option("--alignments", alignments)->required();
  extract->add_option("--lex-f2e", f2e)->required();
  extract->add_option("--lex-e2f", e2f)->required();
  extract->add_option("--out", out_path)->required();

  auto* prune_cmd = app.add_subcommand("prune", "drop phrase pairs with count <= threshold");
  prune_cmd->add_option("--in", input)->required();
  prune_cmd->add_option("--out", out_path)->required();

  auto* lm_train = app.add_subcommand("lm-train", "estimate a trigram LM and write the binary");
  lm_train->add_option("--text", input, "one tokenized sentence per line")->required();
  lm_train->add_option("--out", out_path)->required();
  lm_train->add_option("--dump", dump, "also write a text dump");

  auto* lm_bin = app.add_subcommand("lm-bin", "load and inspect a binary LM");
  lm_bin->add_option("--model", model)->required();
  lm_bin->add_option("--dump", dump, "write a text dump");
  lm_bin->add_flag("--score", score, "score stdin sentences");

  auto* tune = app.add_subcommand("tune", "MERT on a dev set");
  tune->add_option("--table", input)->required();
  tune->add_option("--lm", model)->required();
  tune->add_option("--dev-src", src)->required();
  tune->add_option("--dev-tgt", tgt)->required();
  tune->add_option("--out-dir", out_dir)->required();

  auto* train = app.add_subcommand("train-all", "run every training stage");
  train->add_option("--input", input);
  train->add_option("--work-dir", out_dir);

  auto* rw = app.add_subcommand("rewrite", "rewrite one query or stdin lines");
  rw->add_option("--bundle", bundle_dir)->required();
  auto* query_opt = rw->add_option("--query", query);
  rw->add_flag("--nbest", nbest, "print rank<TAB>score<TAB>surface for the 5-best");

  auto* ev = app.add_subcommand("eval", "rewrite labeled queries and count labels");
  ev->add_option("--bundle", bundle_dir)->required();
  ev->add_option("--input", input, "query<TAB>label file")->required();
  ev->add_option("--out", out_path, "TSV destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;

  const std::string stage_name = app.get_subcommands().front()->get_name();
  try {
    const auto kv = resolve_config(g);
    if (*prep) return cmd_prep(kv, input, out_dir, out);
    if (*align) return cmd_align(kv, src, tgt, out_dir, out);
    if (*extract) return cmd_extract(kv, src, tgt, alignments, f2e, e2f, out_path, out);
    if (*prune_cmd) return cmd_prune(kv, input, out_path, out);
    if (*lm_train) return cmd_lm_train(kv, input, out_path, dump, out);
    if (*lm_bin) return cmd_lm_bin(model, dump, score, in, out);
    if (*tune) return cmd_tune(kv, input, model, src, tgt, out_dir, out);
    if (*train) return cmd_train_all(kv, input, out_dir, out, err);
    if (*rw) {
      return cmd_rewrite(bundle_dir, *query_opt ? std::optional<std::string>(query) : std::nullopt,
                         nbest, in, out, err);
    }
    if (*ev) return cmd_eval(bundle_dir, input, out_path, out);
  } catch (const InputError& e) {
    err << "qrw " << stage_name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const StageError& e) {
    err << "qrw " << stage_name << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "qrw " << stage_name << ": stage failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace qrw
