#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrw/config.hpp"
#include "qrw/embedding.hpp"
#include "qrw/prefilter.hpp"
#include "qrw/report.hpp"
#include "qrw/stemmer.hpp"

namespace qrw {

namespace gate_names {
inline constexpr std::string_view kExactEqual = "exact_equal";
inline constexpr std::string_view kJaccard = "jaccard";
inline constexpr std::string_view kCosineLow = "cosine_low";
inline constexpr std::string_view kCosineHigh = "cosine_high";
}  // namespace gate_names

enum class ProviderKind { kFallback, kRemote };

struct SimFilterConfig {
  double min_jaccard = 0.35;
  double min_cosine = 0.5;
  double max_cosine = 0.9;
  ProviderKind provider = ProviderKind::kFallback;
  std::string embed_url = "http://127.0.0.1:8080";
  int embed_timeout_ms = 5000;
  int embed_retries = 2;
  std::size_t fallback_dim = 256;
  std::size_t batch_size = 64;
  // Use the hashing embedder for a batch the remote provider failed on.
  bool fallback_on_provider_error = false;

  /// Keys: min_jaccard, min_cosine, max_cosine, provider (fallback|remote),
  /// embed_url, embed_timeout_ms, embed_retries, fallback_dim,
  /// embed_batch_size, embed_fallback_on_error.
  static SimFilterConfig from_config(const KeyValueConfig& cfg);
  /// Throws InputError unless 0 <= min_cosine <= max_cosine <= 1.
  void validate() const;
};

std::unique_ptr<EmbeddingProvider> make_provider(const SimFilterConfig& cfg);

struct PairScores {
  double jaccard = 0.0;
  double cosine = 0.0;  // only computed for pairs that reach the cosine gate
};

struct SimFilterResult {
  std::vector<CleanPair> kept;
  FilterReport report;
  std::vector<Verdict> verdicts;
  std::vector<PairScores> scores;
};

/// Gates applied per pair: identical strings, then Jaccard over stem sets,
/// then cosine band; bounds inclusive for keeping.
Verdict similarity_gate(const CleanPair& pair, double jaccard, double cosine,
                        const SimFilterConfig& cfg);

SimFilterResult run_simfilter(std::span<const CleanPair> pairs, const SimFilterConfig& cfg,
                              EmbeddingProvider& provider, const Stemmer& stemmer);

}  // namespace qrw
