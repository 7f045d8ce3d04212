#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qrw/config.hpp"
#include "qrw/lm.hpp"
#include "qrw/phrase_table.hpp"
#include "qrw/text.hpp"

namespace qrw {

inline constexpr std::size_t kNumFeatures = 8;
using FeatureVector = std::array<double, kNumFeatures>;

enum Feature : std::size_t {
  kTmFwd = 0,       // log phi(t|s)
  kTmRev = 1,       // log phi(s|t)
  kLexFwd = 2,      // log lex(t|s)
  kLexRev = 3,      // log lex(s|t)
  kLm = 4,          // log P(target) including </s>
  kWordPenalty = 5,   // -(target words)
  kPhrasePenalty = 6, // -(phrases applied, pass-through included)
  kDistortion = 7,    // -(sum of jump widths)
};

/// Manifest names: tm_fwd tm_rev lex_fwd lex_rev lm word_penalty phrase_penalty distortion.
const std::array<std::string_view, kNumFeatures>& feature_names();

struct FeatureWeights {
  FeatureVector values{0.2, 0.2, 0.2, 0.2, 0.5, -0.5, 0.2, 0.3};

  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
  bool operator==(const FeatureWeights&) const = default;

  /// Throws ContractError unless all finite and at least one nonzero.
  void validate() const;

  /// Reads `weights.<name>` keys, defaulting to `fallback`.
  static FeatureWeights from_config(const KeyValueConfig& kv);
  static FeatureWeights from_config(const KeyValueConfig& kv, const FeatureWeights& fallback);
  void write_to(KeyValueConfig& kv) const;
};

double score_hypothesis(const FeatureVector& features, const FeatureWeights& weights);

struct DecodeParams {
  std::size_t beam_size = 100;  // 0 keeps every hypothesis
  std::size_t distortion_limit = 3;
  std::size_t nbest_size = 5;
  std::size_t max_options_per_span = 20;  // 0 keeps every option

  void validate() const;
  static DecodeParams from_config(const KeyValueConfig& kv);
  static DecodeParams from_config(const KeyValueConfig& kv, const DecodeParams& fallback);
  void write_to(KeyValueConfig& kv) const;
};

/// Phrase table entries grouped by source phrase with target ids resolved
/// against one language model. Immutable once built.
class PhraseIndex {
 public:
  struct Target {
    TokenSeq tokens;
    std::vector<lm::WordId> ids;
    FeatureVector features{};  // every feature except kLm and kDistortion
  };

  PhraseIndex() = default;
  PhraseIndex(const PhraseTable& table, const lm::TrigramModel& lm);

  /// Targets for a space-joined source phrase, or nullptr.
  const std::vector<Target>* find(std::string_view source) const;
  std::size_t max_source_length() const { return max_source_len_; }
  std::size_t size() const { return entries_; }

  /// Features of the identity option for a word with no single-word entry.
  static FeatureVector pass_through_features(std::size_t words = 1);

 private:
  std::unordered_map<std::string, std::vector<Target>> by_source_;
  std::size_t max_source_len_ = 0;
  std::size_t entries_ = 0;
};

struct Hypothesis {
  TokenSeq tokens;
  std::string surface;
  FeatureVector features{};
  double score = 0.0;
};

/// Distinct surfaces in descending score order.
using NBestList = std::vector<Hypothesis>;

/// Coverage-stack beam search. Every query token either has phrase options
/// or gets an identity pass-through, so the result is never empty. When the
/// distortion limit strands every hypothesis, the search reruns monotone.
/// Throws ContractError on an empty query, n == 0, or more than 64 tokens.
NBestList decode(const PhraseIndex& index, const lm::TrigramModel& lm,
                 const FeatureWeights& weights, const DecodeParams& params,
                 std::span<const std::string> query, std::size_t n);

}  // namespace qrw
