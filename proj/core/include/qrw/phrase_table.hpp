#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrw/align.hpp"
#include "qrw/text.hpp"

namespace qrw {

/// Source span [src_begin, src_end) paired with target span [tgt_begin, tgt_end).
struct PhraseSpan {
  std::uint32_t src_begin, src_end, tgt_begin, tgt_end;
  auto operator<=>(const PhraseSpan&) const = default;
};

struct PhrasePair {
  TokenSeq source;
  TokenSeq target;
  auto operator<=>(const PhrasePair&) const = default;
};

/// Every consistent span pair with both sides at most max_len and at least
/// one link, sorted. Unaligned source words at the span edges extend it.
std::vector<PhraseSpan> extract_spans(const AlignmentMatrix& alignment, std::size_t max_len = 5);

std::vector<PhrasePair> extract_phrases(std::span<const std::string> source,
                                        std::span<const std::string> target,
                                        const AlignmentMatrix& alignment, std::size_t max_len = 5);

/// Co-occurrence counts keyed by (space-joined source, space-joined target).
using PhraseCounts = std::map<std::pair<std::string, std::string>, std::uint64_t>;

PhraseCounts count_phrases(std::span<const ParallelPair> corpus,
                           std::span<const AlignmentMatrix> alignments, std::size_t max_len = 5,
                           int threads = 1);

struct PhraseScores {
  std::uint64_t count = 0;
  double phi_ts = 0;  // phi(t|s)
  double lex_ts = 0;  // lex(t|s)
  double phi_st = 0;  // phi(s|t)
  double lex_st = 0;  // lex(s|t)
  bool operator==(const PhraseScores&) const = default;
};

/// Scored phrase pairs sorted by source then target.
class PhraseTable {
 public:
  using Key = std::pair<std::string, std::string>;
  using Map = std::map<Key, PhraseScores>;

  void insert(std::string source, std::string target, const PhraseScores& scores);
  const PhraseScores* find(const std::string& source, const std::string& target) const;
  const Map& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool operator==(const PhraseTable&) const = default;

  /// `src ||| tgt ||| phi(t|s) lex(t|s) phi(s|t) lex(s|t) ||| count`, scores
  /// with 9 significant digits. Throws InputError if a token holds "|||".
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  /// Throws FormatError naming the line number on a malformed line.
  static PhraseTable read(std::istream& in);
  static PhraseTable load(const std::filesystem::path& path);

 private:
  Map entries_;
};

/// Relative frequencies in both directions plus lexical weights
///   lex(t|s) = prod_j max_{i in s + null} t_fwd(t_j | s_i)
/// and the mirror image with t_rev. Throws ContractError on empty counts.
PhraseTable score_phrase_table(const PhraseCounts& counts, const TranslationTable& lex_fwd,
                               const TranslationTable& lex_rev);

double lexical_weight(std::span<const std::string> source, std::span<const std::string> target,
                      const TranslationTable& table);

struct PruneResult {
  PhraseTable table;
  std::size_t removed = 0;
  std::size_t retained = 0;
};

/// Drops every entry whose count is <= max_dropped_count; scores untouched.
PruneResult prune(const PhraseTable& table, std::uint64_t max_dropped_count = 3);

}  // namespace qrw
