#include "qrw/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "qrw/error.hpp"

namespace qrw {

namespace {

constexpr double kProbFloor = 1e-12;

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::array<std::string_view, kNumFeatures>& feature_names() {
  static constexpr std::array<std::string_view, kNumFeatures> kNames = {
      "tm_fwd", "tm_rev", "lex_fwd", "lex_rev", "lm", "word_penalty", "phrase_penalty",
      "distortion"};
  return kNames;
}

void FeatureWeights::validate() const {
  bool nonzero = false;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    if (!std::isfinite(values[k])) {
      throw ContractError("weight " + std::string(feature_names()[k]) + " is not finite");
    }
    nonzero = nonzero || values[k] != 0.0;
  }
  if (!nonzero) throw ContractError("all feature weights are zero");
}

FeatureWeights FeatureWeights::from_config(const KeyValueConfig& kv) {
  return from_config(kv, FeatureWeights{});
}

FeatureWeights FeatureWeights::from_config(const KeyValueConfig& kv,
                                           const FeatureWeights& fallback) {
  FeatureWeights w = fallback;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    w.values[k] = kv.get_double("weights." + std::string(feature_names()[k]), w.values[k]);
  }
  try {
    w.validate();
  } catch (const ContractError& e) {
    throw InputError(e.what());
  }
  return w;
}

void FeatureWeights::write_to(KeyValueConfig& kv) const {
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    kv.set("weights." + std::string(feature_names()[k]), format_double(values[k]));
  }
}

double score_hypothesis(const FeatureVector& features, const FeatureWeights& weights) {
  double s = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) s += features[k] * weights.values[k];
  return s;
}

void DecodeParams::validate() const {
  if (nbest_size == 0) throw InputError("nbest_size must be >= 1");
}

DecodeParams DecodeParams::from_config(const KeyValueConfig& kv) {
  return from_config(kv, DecodeParams{});
}

DecodeParams DecodeParams::from_config(const KeyValueConfig& kv, const DecodeParams& fallback) {
  DecodeParams p = fallback;
  auto get = [&](const char* key, std::size_t dflt) {
    const long long v = kv.get_int(key, static_cast<long long>(dflt));
    if (v < 0) throw InputError(std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  p.beam_size = get("beam_size", p.beam_size);
  p.distortion_limit = get("distortion_limit", p.distortion_limit);
  p.nbest_size = get("nbest_size", p.nbest_size);
  p.max_options_per_span = get("max_options_per_span", p.max_options_per_span);
  p.validate();
  return p;
}

void DecodeParams::write_to(KeyValueConfig& kv) const {
  kv.set("beam_size", std::to_string(beam_size));
  kv.set("distortion_limit", std::to_string(distortion_limit));
  kv.set("nbest_size", std::to_string(nbest_size));
  kv.set("max_options_per_span", std::to_string(max_options_per_span));
}

// -------------------------------------------------------------- PhraseIndex

PhraseIndex::PhraseIndex(const PhraseTable& table, const lm::TrigramModel& lm) {
  for (const auto& [key, sc] : table.entries()) {
    Target t;
    t.tokens = tokenize(key.second);
    t.ids.reserve(t.tokens.size());
    for (const auto& w : t.tokens) t.ids.push_back(lm.id(w));
    t.features[kTmFwd] = safe_log(sc.phi_ts);
    t.features[kTmRev] = safe_log(sc.phi_st);
    t.features[kLexFwd] = safe_log(sc.lex_ts);
    t.features[kLexRev] = safe_log(sc.lex_st);
    t.features[kWordPenalty] = -static_cast<double>(t.tokens.size());
    t.features[kPhrasePenalty] = -1.0;
    max_source_len_ = std::max(max_source_len_, tokenize(key.first).size());
    by_source_[key.first].push_back(std::move(t));
    ++entries_;
  }
}

const std::vector<PhraseIndex::Target>* PhraseIndex::find(std::string_view source) const {
  auto it = by_source_.find(std::string(source));
  return it == by_source_.end() ? nullptr : &it->second;
}

FeatureVector PhraseIndex::pass_through_features(std::size_t words) {
  FeatureVector f{};
  f[kWordPenalty] = -static_cast<double>(words);
  f[kPhrasePenalty] = -1.0;
  return f;
}

// ----------------------------------------------------------------- search

namespace {

struct Option {
  std::uint32_t begin, end;
  const PhraseIndex::Target* target;
};

struct Node {
  std::uint64_t coverage = 0;
  std::size_t prev_end = 0;  // exclusive end of the last applied span
  lm::LmState lm_state;
  FeatureVector features{};
  double score = 0.0;
  std::string surface;
};

bool better(const Node& a, const Node& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.surface != b.surface) return a.surface < b.surface;
  if (a.coverage != b.coverage) return a.coverage < b.coverage;
  return a.prev_end < b.prev_end;
}

std::vector<Option> collect_options(const PhraseIndex& index, const FeatureWeights& weights,
                                    const DecodeParams& params,
                                    std::span<const std::string> query,
                                    const std::vector<PhraseIndex::Target>& pass_through) {
  std::vector<Option> options;
  const std::size_t n = query.size();
  const std::size_t max_len = std::max<std::size_t>(1, index.max_source_length());
  for (std::size_t b = 0; b < n; ++b) {
    std::string key;
    for (std::size_t e = b + 1; e <= std::min(n, b + max_len); ++e) {
      if (e > b + 1) key += ' ';
      key += query[e - 1];
      const auto* targets = index.find(key);
      if (!targets) {
        if (e == b + 1) {
          options.push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e),
                             &pass_through[b]});
        }
        continue;
      }
      std::vector<const PhraseIndex::Target*> ranked;
      ranked.reserve(targets->size());
      for (const auto& t : *targets) ranked.push_back(&t);
      std::stable_sort(ranked.begin(), ranked.end(), [&](const auto* x, const auto* y) {
        const double sx = score_hypothesis(x->features, weights);
        const double sy = score_hypothesis(y->features, weights);
        if (sx != sy) return sx > sy;
        return x->tokens < y->tokens;
      });
      if (params.max_options_per_span > 0 && ranked.size() > params.max_options_per_span) {
        ranked.resize(params.max_options_per_span);
      }
      for (const auto* t : ranked) {
        options.push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e), t});
      }
    }
  }
  return options;
}

std::vector<Node> search(const std::vector<Option>& options, const lm::TrigramModel& lm,
                         const FeatureWeights& weights, std::size_t n_words,
                         std::size_t beam_size, std::size_t distortion_limit) {
  const std::uint64_t full =
      n_words == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_words) - 1);
  std::vector<std::vector<Node>> stacks(n_words + 1);
  std::vector<std::unordered_map<std::string, std::size_t>> seen(n_words + 1);
  stacks[0].push_back(Node{});

  auto recombine_key = [](const Node& h) {
    std::string k = std::to_string(h.coverage);
    k += '|';
    k += std::to_string(h.prev_end);
    k += '|';
    k += h.surface;
    return k;
  };

  for (std::size_t k = 0; k < n_words; ++k) {
    auto& stack = stacks[k];
    std::sort(stack.begin(), stack.end(), better);
    if (beam_size > 0 && stack.size() > beam_size) stack.resize(beam_size);

    for (const Node& h : stack) {
      for (const Option& opt : options) {
        const std::size_t width = opt.end - opt.begin;
        const std::uint64_t mask =
            (width == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1)) << opt.begin;
        if (h.coverage & mask) continue;
        const std::size_t jump =
            opt.begin > h.prev_end ? opt.begin - h.prev_end : h.prev_end - opt.begin;
        if (jump > distortion_limit) continue;

        Node next;
        next.coverage = h.coverage | mask;
        next.prev_end = opt.end;
        next.lm_state = h.lm_state;
        next.features = h.features;
        next.surface = h.surface;
        for (std::size_t f = 0; f < kNumFeatures; ++f) next.features[f] += opt.target->features[f];
        for (std::size_t t = 0; t < opt.target->tokens.size(); ++t) {
          next.features[kLm] += lm.score(next.lm_state, opt.target->ids[t]);
          if (!next.surface.empty()) next.surface += ' ';
          next.surface += opt.target->tokens[t];
        }
        next.features[kDistortion] -= static_cast<double>(jump);
        const std::size_t covered = k + width;
        if (next.coverage == full) next.features[kLm] += lm.score(next.lm_state, lm::kEos);
        next.score = score_hypothesis(next.features, weights);

        auto key = recombine_key(next);
        auto [it, inserted] = seen[covered].try_emplace(std::move(key), stacks[covered].size());
        if (inserted) {
          stacks[covered].push_back(std::move(next));
        } else if (next.score > stacks[covered][it->second].score) {
          stacks[covered][it->second] = std::move(next);
        }
      }
    }
    stack.clear();
    stack.shrink_to_fit();
  }
  auto& last = stacks[n_words];
  std::sort(last.begin(), last.end(), better);
  return std::move(last);
}

}  // namespace

NBestList decode(const PhraseIndex& index, const lm::TrigramModel& lm,
                 const FeatureWeights& weights, const DecodeParams& params,
                 std::span<const std::string> query, std::size_t n) {
  if (query.empty()) throw ContractError("cannot decode an empty query");
  if (n == 0) throw ContractError("n-best size must be >= 1");
  if (query.size() > 64) throw ContractError("queries longer than 64 tokens are not supported");

  std::vector<PhraseIndex::Target> pass_through(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    pass_through[i].tokens = {query[i]};
    pass_through[i].ids = {lm.id(query[i])};
    pass_through[i].features = PhraseIndex::pass_through_features(1);
  }
  const auto options = collect_options(index, weights, params, query, pass_through);

  auto finals =
      search(options, lm, weights, query.size(), params.beam_size, params.distortion_limit);
  if (finals.empty() && params.distortion_limit > 0) {
    finals = search(options, lm, weights, query.size(), params.beam_size, 0);
  }

  NBestList out;
  std::unordered_map<std::string, bool> emitted;
  for (auto& h : finals) {
    if (out.size() >= n) break;
    if (!emitted.emplace(h.surface, true).second) continue;
    Hypothesis hyp;
    hyp.tokens = tokenize(h.surface);
    hyp.surface = std::move(h.surface);
    hyp.features = h.features;
    hyp.score = h.score;
    out.push_back(std::move(hyp));
  }
  return out;
}

}  // namespace qrw
