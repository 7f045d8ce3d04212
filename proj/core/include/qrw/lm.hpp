#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qrw/text.hpp"

namespace qrw::lm {

using WordId = std::uint32_t;

inline constexpr WordId kUnk = 0;
inline constexpr WordId kBos = 1;
inline constexpr WordId kEos = 2;
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

/// Raw 1/2/3-gram counts over sentences padded as <s> <s> w1 .. wn </s>.
/// Ids are assigned by first appearance; 0..2 are <unk>, <s>, </s>.
class NGramCounts {
 public:
  static constexpr WordId kMaxVocab = (1u << 21) - 1;

  NGramCounts();

  void add_sentence(std::span<const std::string> tokens);
  /// Sums counts of `other` into this one (ids remapped through strings).
  void merge(const NGramCounts& other);

  bool empty() const { return trigrams_.empty(); }
  std::size_t vocab_size() const { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  /// Id of `token`, or kUnk when never seen.
  WordId find(std::string_view token) const;

  /// Count of a 1-, 2- or 3-gram given as tokens; 0 when absent.
  std::uint64_t count(std::span<const std::string> ngram) const;

  const std::unordered_map<WordId, std::uint64_t>& unigrams() const { return unigrams_; }
  const std::unordered_map<std::uint64_t, std::uint64_t>& bigrams() const { return bigrams_; }
  const std::unordered_map<std::uint64_t, std::uint64_t>& trigrams() const { return trigrams_; }

  static std::uint64_t pack(WordId u, WordId v) { return (std::uint64_t{u} << 32) | v; }
  static std::uint64_t pack(WordId u, WordId v, WordId w) {
    return (std::uint64_t{u} << 42) | (std::uint64_t{v} << 21) | w;
  }
  static std::pair<WordId, WordId> unpack2(std::uint64_t k) {
    return {static_cast<WordId>(k >> 32), static_cast<WordId>(k & 0xFFFFFFFFu)};
  }
  static void unpack3(std::uint64_t k, WordId& u, WordId& v, WordId& w) {
    u = static_cast<WordId>(k >> 42);
    v = static_cast<WordId>((k >> 21) & kMaxVocab);
    w = static_cast<WordId>(k & kMaxVocab);
  }

 private:
  WordId intern(std::string_view token);
  void add_ids(std::span<const WordId> padded, std::uint64_t times);

  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::unordered_map<WordId, std::uint64_t> unigrams_;
  std::unordered_map<std::uint64_t, std::uint64_t> bigrams_;
  std::unordered_map<std::uint64_t, std::uint64_t> trigrams_;
};

struct CountOptions {
  // Tokens seen fewer times are counted as <unk>.
  std::uint64_t min_count = 1;
};

NGramCounts count_ngrams(std::span<const TokenSeq> corpus, const CountOptions& opts = {});

/// Decoder-facing LM state: the two most recent words.
struct LmState {
  WordId prev2 = kBos;
  WordId prev1 = kBos;
  bool operator==(const LmState&) const = default;
};

/// Interpolated Kneser-Ney trigram model with one fixed discount.
///
///   p3(w|u v) = max(c(uvw)-D,0)/c(uv.) + D n(uv.)/c(uv.) p2(w|v)
///   p2(w|v)   = max(N(.vw)-D,0)/N(.v.) + D n(v.)/N(.v.) p1(w)
///   p1(w)     = max(N(.w)-D,0)/N(..)   + D n(.)/N(..) / |P|
///
/// where N counts distinct left extensions and P is every vocabulary word
/// except <s> (so <unk> and </s> are included). Unseen contexts fall
/// through to the lower order with weight 1. Scores are natural logs.
class TrigramModel {
 public:
  static TrigramModel estimate(const NGramCounts& counts, double discount = 0.75);

  static TrigramModel load_binary(const std::filesystem::path& path);
  static TrigramModel from_binary(std::string_view bytes);
  void save_binary(const std::filesystem::path& path) const;
  std::string to_binary() const;

  /// `logprob<TAB>ngram` for every stored n-gram, sorted by n-gram.
  void dump_text(std::ostream& out) const;

  double discount() const { return discount_; }
  std::size_t vocab_size() const { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  WordId id(std::string_view token) const;
  /// Every id that can be predicted (all but <s>).
  std::vector<WordId> predictable_ids() const;

  double prob(WordId u, WordId v, WordId w) const;
  double log_prob(WordId u, WordId v, WordId w) const;
  /// log p(w | state) and advances the state.
  double score(LmState& state, WordId w) const;
  /// Sum of log p over the tokens and the closing </s>.
  double sentence_logprob(std::span<const std::string> tokens) const;

  std::vector<WordId> bigram_contexts() const;
  std::vector<std::pair<WordId, WordId>> trigram_contexts() const;
  std::size_t bigram_entry_count() const { return bigram_entries_.size(); }
  std::size_t trigram_entry_count() const { return trigram_entries_.size(); }

 private:
  struct Entry {
    WordId word;
    double alpha;  // discounted mass of the observed event
  };
  struct BigramContext {
    WordId v;
    double gamma;  // interpolation weight to the lower order
    std::uint64_t begin, end;
  };
  struct TrigramContext {
    WordId u, v;
    double gamma;
    std::uint64_t begin, end;
  };

  void build_index();
  double bigram_prob(WordId v, WordId w) const;
  static const Entry* find_entry(const std::vector<Entry>& entries, std::uint64_t begin,
                                 std::uint64_t end, WordId w);

  double discount_ = 0.75;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<double> unigram_;
  std::vector<BigramContext> bigram_ctx_;  // sorted by v
  std::vector<Entry> bigram_entries_;      // sorted by (context, word)
  std::vector<TrigramContext> trigram_ctx_;  // sorted by (u, v)
  std::vector<Entry> trigram_entries_;
  std::vector<std::uint32_t> bigram_ctx_of_;  // word id -> bigram_ctx_ slot or npos
};

inline TrigramModel estimate_kneser_ney(const NGramCounts& counts, double discount = 0.75) {
  return TrigramModel::estimate(counts, discount);
}

}  // namespace qrw::lm
