#pragma once

#include <filesystem>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrw/config.hpp"
#include "qrw/report.hpp"
#include "qrw/text.hpp"

namespace qrw {

namespace filter_names {
inline constexpr std::string_view kTopRank = "top_rank";
inline constexpr std::string_view kMinChars = "min_chars";
inline constexpr std::string_view kMinTokens = "min_tokens";
inline constexpr std::string_view kTokenDiff = "token_diff";
inline constexpr std::string_view kAlnumRatio = "alnum_ratio";
inline constexpr std::string_view kArabicRatio = "arabic_ratio";
}  // namespace filter_names

struct PrefilterConfig {
  int max_rank = 5;
  int min_chars = 20;
  int min_tokens = 3;
  int max_token_diff = 3;
  int max_token_run = 3;
  double min_alnum_ratio = 0.9;
  double min_arabic_ratio = 0.7;
  // Empty path selects the built-in site list.
  std::filesystem::path site_blocklist;
  std::vector<std::string> url_patterns = default_url_patterns();
  NormConfig norm;

  static std::vector<std::string> default_url_patterns();
  /// Keys: max_rank, min_chars, min_tokens, max_token_diff, max_token_run,
  /// min_alnum_ratio, min_arabic_ratio, site_blocklist, url_patterns
  /// (whitespace-separated regexes). Unset keys keep their defaults.
  static PrefilterConfig from_config(const KeyValueConfig& cfg);
  /// Throws InputError when a ratio is outside [0,1] or an integer is < 1.
  void validate() const;
};

/// Keep/drop outcome; `dropped_by` names the first rejecting filter.
struct Verdict {
  std::string_view dropped_by;

  bool kept() const { return dropped_by.empty(); }
  static Verdict keep() { return {}; }
  static Verdict drop(std::string_view filter) { return {filter}; }
};

/// A query-title pair after cleaning; texts are normalized and stripped,
/// token sequences are post-collapse and `*_text == join_tokens(*_tokens)`.
struct CleanPair {
  std::string id;
  int rank = 1;
  std::string query_text;
  std::string title_text;
  TokenSeq query_tokens;
  TokenSeq title_tokens;
};

/// Built-in site names: the two examples motivating the filter plus
/// common portals. Names are normalized with `norm`.
std::vector<std::string> default_site_names(const NormConfig& norm = {});
/// One name per line, '#' comments, normalized with `norm`.
std::vector<std::string> load_site_blocklist(const std::filesystem::path& path,
                                             const NormConfig& norm = {});

/// Deletes every maximal run of an identical token longer than `max_run`.
TokenSeq collapse_repeated_tokens(std::span<const std::string> tokens, int max_run);

Verdict structural_filter(const CleanPair& pair, const PrefilterConfig& cfg);
Verdict charset_filter(std::string_view text, const PrefilterConfig& cfg);
/// Both sides through charset_filter, alphanumeric check before Arabic check.
Verdict charset_filter(const CleanPair& pair, const PrefilterConfig& cfg);

std::vector<QueryTitleRecord> keep_top_ranks(std::span<const QueryTitleRecord> records,
                                             const PrefilterConfig& cfg);

struct PrefilterResult {
  std::vector<CleanPair> kept;
  FilterReport report;
  std::vector<Verdict> verdicts;  // one per input record, input order
};

/// Structural cleaning: normalize, strip punctuation/URLs/sites, top-rank,
/// collapse runs, structural thresholds, charset ratios. Stateless per record.
class Prefilter {
 public:
  explicit Prefilter(PrefilterConfig cfg);

  const PrefilterConfig& config() const { return cfg_; }

  /// Punctuation, URL matches and blocklisted site names become single
  /// spaces; result is whitespace-collapsed.
  std::string strip_punct_urls_sites(std::string_view text) const;

  /// Full cleaning of one record plus its verdict.
  Verdict apply(const QueryTitleRecord& record, CleanPair* out) const;

  PrefilterResult run(std::span<const QueryTitleRecord> records) const;

  static std::vector<std::string> filter_order();

 private:
  PrefilterConfig cfg_;
  std::vector<std::regex> url_regexes_;
  std::vector<TokenSeq> sites_;  // longest first
};

inline PrefilterResult run_prefilter(std::span<const QueryTitleRecord> records,
                                     const PrefilterConfig& cfg) {
  return Prefilter(cfg).run(records);
}

}  // namespace qrw
