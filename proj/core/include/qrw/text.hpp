#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrw {

/// Whitespace-free, non-empty tokens in sentence order.
using TokenSeq = std::vector<std::string>;
/// (source, target) sides of one parallel sentence pair.
using ParallelPair = std::pair<TokenSeq, TokenSeq>;

struct QueryTitleRecord {
  std::string query;
  std::string title;
  int rank = 1;    // search-result position, >= 1
  std::string id;  // opaque; the loader uses "L<line number>"
};

enum class UnicodeForm { kNone, kNfc, kNfkc };

struct NormConfig {
  bool strip_diacritics = true;  // U+064B..U+0652
  bool strip_tatweel = true;     // U+0640
  UnicodeForm unicode_form = UnicodeForm::kNfc;
  bool lowercase_latin = true;
  // alef variants -> bare alef, alef maqsura -> yeh, teh marbuta -> heh
  bool arabic_letter_unification = true;
};

/// Canonical form, optional Arabic cleanup, whitespace collapsed and trimmed.
/// Idempotent for every input; invalid UTF-8 becomes U+FFFD.
std::string normalize_text(std::string_view text, const NormConfig& cfg = {});

/// Splits on whitespace. Empty input yields an empty sequence.
TokenSeq tokenize(std::string_view text);

/// Joins with single spaces; tokenize(join_tokens(t)) == t for tokenized t.
std::string join_tokens(std::span<const std::string> tokens);

namespace unicode {

std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view code_points);
std::size_t length(std::string_view utf8);

bool is_whitespace(char32_t c);
bool is_alnum(char32_t c);
bool is_alpha(char32_t c);
// Unicode punctuation plus ASCII symbols such as '|', '$' and '+'.
bool is_punct(char32_t c);
// U+0600-06FF, U+0750-077F, U+FB50-FDFF, U+FE70-FEFF
bool is_arabic_block(char32_t c);
char32_t to_lower(char32_t c);

}  // namespace unicode

struct LoadStats {
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
};

/// Streams `query<TAB>title<TAB>rank` rows. Malformed rows (wrong column
/// count, empty side, non-integer or < 1 rank) are counted and skipped.
class RawPairReader {
 public:
  /// Throws IoError if the file cannot be opened.
  explicit RawPairReader(const std::filesystem::path& path);

  std::optional<QueryTitleRecord> next();
  const LoadStats& stats() const { return stats_; }

 private:
  std::ifstream in_;
  std::uint64_t line_no_ = 0;
  LoadStats stats_;
};

/// Parses one TSV row; std::nullopt when malformed.
std::optional<QueryTitleRecord> parse_raw_row(std::string_view line, std::string id);

std::vector<QueryTitleRecord> load_raw_pairs(const std::filesystem::path& path,
                                             LoadStats* stats = nullptr);

struct ParallelWriteCounts {
  std::uint64_t written = 0;
  std::uint64_t dropped = 0;  // pairs with an empty side
};

/// Line i of `src_path` corresponds to line i of `tgt_path`.
ParallelWriteCounts write_parallel(std::span<const ParallelPair> pairs,
                                   const std::filesystem::path& src_path,
                                   const std::filesystem::path& tgt_path);

/// Throws FormatError when the two files differ in line count.
std::vector<ParallelPair> read_parallel(const std::filesystem::path& src_path,
                                        const std::filesystem::path& tgt_path);

/// One tokenized sentence per line.
std::vector<TokenSeq> read_sentences(const std::filesystem::path& path);

}  // namespace qrw
