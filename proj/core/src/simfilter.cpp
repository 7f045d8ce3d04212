#include "qrw/simfilter.hpp"

#include "qrw/error.hpp"

namespace qrw {

SimFilterConfig SimFilterConfig::from_config(const KeyValueConfig& kv) {
  SimFilterConfig cfg;
  cfg.min_jaccard = kv.get_double("min_jaccard", cfg.min_jaccard);
  cfg.min_cosine = kv.get_double("min_cosine", cfg.min_cosine);
  cfg.max_cosine = kv.get_double("max_cosine", cfg.max_cosine);
  const auto provider = kv.get_string("provider", "fallback");
  if (provider == "fallback") {
    cfg.provider = ProviderKind::kFallback;
  } else if (provider == "remote") {
    cfg.provider = ProviderKind::kRemote;
  } else {
    throw InputError("provider must be 'fallback' or 'remote', got '" + provider + "'");
  }
  cfg.embed_url = kv.get_string("embed_url", cfg.embed_url);
  cfg.embed_timeout_ms = static_cast<int>(kv.get_int("embed_timeout_ms", cfg.embed_timeout_ms));
  cfg.embed_retries = static_cast<int>(kv.get_int("embed_retries", cfg.embed_retries));
  cfg.fallback_dim = static_cast<std::size_t>(
      kv.get_int("fallback_dim", static_cast<long long>(cfg.fallback_dim)));
  cfg.batch_size = static_cast<std::size_t>(
      kv.get_int("embed_batch_size", static_cast<long long>(cfg.batch_size)));
  cfg.fallback_on_provider_error =
      kv.get_bool("embed_fallback_on_error", cfg.fallback_on_provider_error);
  cfg.validate();
  return cfg;
}

void SimFilterConfig::validate() const {
  if (!(min_jaccard >= 0.0 && min_jaccard <= 1.0)) {
    throw InputError("min_jaccard must lie in [0,1]");
  }
  if (!(0.0 <= min_cosine && min_cosine <= max_cosine && max_cosine <= 1.0)) {
    throw InputError("cosine bounds must satisfy 0 <= min_cosine <= max_cosine <= 1");
  }
  if (fallback_dim == 0) throw InputError("fallback_dim must be positive");
  if (batch_size == 0) throw InputError("embed_batch_size must be positive");
  if (embed_retries < 0) throw InputError("embed_retries must be >= 0");
  if (embed_timeout_ms <= 0) throw InputError("embed_timeout_ms must be positive");
}

std::unique_ptr<EmbeddingProvider> make_provider(const SimFilterConfig& cfg) {
  if (cfg.provider == ProviderKind::kRemote) {
    RemoteEmbedderOptions o;
    o.base_url = cfg.embed_url;
    o.timeout = std::chrono::milliseconds(cfg.embed_timeout_ms);
    o.retries = cfg.embed_retries;
    return std::make_unique<RemoteEmbedder>(std::move(o));
  }
  return std::make_unique<HashingEmbedder>(cfg.fallback_dim);
}

Verdict similarity_gate(const CleanPair& pair, double jaccard, double cosine,
                        const SimFilterConfig& cfg) {
  if (pair.query_text == pair.title_text) return Verdict::drop(gate_names::kExactEqual);
  if (jaccard < cfg.min_jaccard) return Verdict::drop(gate_names::kJaccard);
  if (cosine < cfg.min_cosine) return Verdict::drop(gate_names::kCosineLow);
  if (cosine > cfg.max_cosine) return Verdict::drop(gate_names::kCosineHigh);
  return Verdict::keep();
}

SimFilterResult run_simfilter(std::span<const CleanPair> pairs, const SimFilterConfig& cfg,
                              EmbeddingProvider& provider, const Stemmer& stemmer) {
  cfg.validate();
  SimFilterResult result;
  result.report = FilterReport({std::string(gate_names::kExactEqual),
                                std::string(gate_names::kJaccard),
                                std::string(gate_names::kCosineLow),
                                std::string(gate_names::kCosineHigh)});
  result.verdicts.assign(pairs.size(), Verdict::keep());
  result.scores.assign(pairs.size(), PairScores{});

  // The two cheap gates first; only survivors are embedded.
  std::vector<std::size_t> need_cosine;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.query_text == p.title_text) {
      result.verdicts[i] = Verdict::drop(gate_names::kExactEqual);
      continue;
    }
    result.scores[i].jaccard = jaccard_index(make_stem_set(p.query_tokens, stemmer),
                                             make_stem_set(p.title_tokens, stemmer));
    if (result.scores[i].jaccard < cfg.min_jaccard) {
      result.verdicts[i] = Verdict::drop(gate_names::kJaccard);
      continue;
    }
    need_cosine.push_back(i);
  }

  std::size_t zero_vectors = 0;
  std::uint64_t fallback_batches = 0;
  HashingEmbedder fallback(cfg.fallback_dim);
  for (std::size_t b = 0; b < need_cosine.size(); b += cfg.batch_size) {
    const auto n = std::min(cfg.batch_size, need_cosine.size() - b);
    std::vector<std::string> texts;
    texts.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = pairs[need_cosine[b + k]];
      texts.push_back(p.query_text);
      texts.push_back(p.title_text);
    }
    std::vector<EmbeddingVector> vecs;
    try {
      vecs = provider.embed(texts);
    } catch (const ProviderError&) {
      if (!cfg.fallback_on_provider_error) throw;
      ++fallback_batches;
      vecs = fallback.embed(texts);
    }
    if (vecs.size() != texts.size()) {
      throw ProviderError("provider returned " + std::to_string(vecs.size()) +
                          " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = need_cosine[b + k];
      result.scores[i].cosine = cosine_similarity(vecs[2 * k], vecs[2 * k + 1], &zero_vectors);
      result.verdicts[i] =
          similarity_gate(pairs[i], result.scores[i].jaccard, result.scores[i].cosine, cfg);
    }
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    result.report.record_input();
    if (result.verdicts[i].kept()) {
      result.report.record_kept();
      result.kept.push_back(pairs[i]);
    } else {
      result.report.record_drop(std::string(result.verdicts[i].dropped_by));
    }
  }
  if (zero_vectors) result.report.add_note("zero_vector_warnings", zero_vectors);
  if (fallback_batches) result.report.add_note("provider_fallback_batches", fallback_batches);
  return result;
}

}  // namespace qrw
