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

namespace qrw {

inline constexpr std::string_view kNullToken = "<null>";

/// Word translation probabilities t(target | source); the source side
/// includes the empty word kNullToken.
class TranslationTable {
 public:
  double prob(std::string_view source, std::string_view target) const;
  void set(std::string_view source, std::string_view target, double p);

  std::size_t size() const { return probs_.size(); }
  /// Sum of t(. | source) over every stored target.
  double row_sum(std::string_view source) const;
  std::vector<std::string> sources() const;

  /// `source<TAB>target<TAB>prob` lines sorted by (source, target).
  void dump(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static TranslationTable load(const std::filesystem::path& path);

 private:
  std::uint32_t intern(std::vector<std::string>& words,
                       std::unordered_map<std::string, std::uint32_t>& index,
                       std::string_view w);
  static std::uint64_t key(std::uint32_t s, std::uint32_t t) {
    return (std::uint64_t{s} << 32) | t;
  }

  std::vector<std::string> src_words_, tgt_words_;
  std::unordered_map<std::string, std::uint32_t> src_index_, tgt_index_;
  std::unordered_map<std::uint64_t, double> probs_;
};

struct Model1Options {
  int iterations = 5;
  bool use_null = true;
  // E-step workers; counts merge in sentence order for a fixed value.
  int threads = 1;
};

struct Model1Result {
  TranslationTable table;
  // Corpus log-likelihood under the initial parameters and after every
  // M-step; iterations + 1 entries.
  std::vector<double> log_likelihood;
};

/// IBM Model 1 EM with uniform initialization over co-occurring pairs.
/// Throws ContractError on an empty corpus or a pair with an empty side.
Model1Result train_model1(std::span<const ParallelPair> corpus, const Model1Options& opts = {});

/// Link set between a source sentence of length I and target of length J.
class AlignmentMatrix {
 public:
  AlignmentMatrix() = default;
  AlignmentMatrix(std::size_t source_length, std::size_t target_length);

  std::size_t source_length() const { return rows_; }
  std::size_t target_length() const { return cols_; }

  /// Throws ContractError when (i, j) is out of bounds.
  void add(std::size_t i, std::size_t j);
  bool contains(std::size_t i, std::size_t j) const;
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Sorted (source, target) links.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> links() const;
  AlignmentMatrix transposed() const;

  bool operator==(const AlignmentMatrix&) const = default;

  /// Space-separated `i-j` pairs, sorted.
  std::string to_string() const;
  static AlignmentMatrix parse(std::string_view line, std::size_t source_length,
                               std::size_t target_length);

 private:
  std::size_t rows_ = 0, cols_ = 0, count_ = 0;
  std::vector<std::uint8_t> grid_;
};

/// Each target word links to argmax_i t(target | source_i); the null word
/// wins ties and produces no link, then smaller i wins.
AlignmentMatrix viterbi_align(const TranslationTable& table, std::span<const std::string> source,
                              std::span<const std::string> target);

/// grow-diag-final-and. `fwd` is source x target; `rev` is target x source
/// and is transposed before combining.
AlignmentMatrix symmetrize(const AlignmentMatrix& fwd, const AlignmentMatrix& rev);

std::vector<AlignmentMatrix> read_alignments(const std::filesystem::path& path,
                                             std::span<const ParallelPair> corpus);
void write_alignments(const std::filesystem::path& path,
                      std::span<const AlignmentMatrix> alignments);

}  // namespace qrw
