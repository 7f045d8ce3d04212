#include "qrw/prefilter.hpp"

#include <algorithm>
#include <fstream>

#include "qrw/error.hpp"

namespace qrw {
namespace {

constexpr const char* kBuiltinSites[] = {
    "فيسبوك",   "ويكيبيديا", "يوتيوب",  "تويتر",    "انستقرام", "انستغرام",
    "جوجل",     "قوقل",      "لينكد ان", "سناب شات", "تيك توك",  "facebook",
    "wikipedia", "youtube",  "twitter", "instagram", "google",   "linkedin",
    "tiktok",   "snapchat",  "pinterest", "reddit",  "amazon",   "souq",
};

TokenSeq fold_tokens(const TokenSeq& tokens) {
  TokenSeq folded;
  folded.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto cps = unicode::decode(t);
    for (auto& c : cps) c = unicode::to_lower(c);
    folded.push_back(unicode::encode(cps));
  }
  return folded;
}

bool ratio_below(std::size_t part, std::size_t whole, double threshold) {
  // Inclusive keep at exactly the threshold.
  return static_cast<double>(part) + 1e-9 < threshold * static_cast<double>(whole);
}

}  // namespace

std::vector<std::string> PrefilterConfig::default_url_patterns() {
  return {
      R"((?:https?|ftp)://\S+)",
      R"(\bwww\.\S+)",
      R"(\b[A-Za-z0-9][A-Za-z0-9-]*(?:\.[A-Za-z0-9-]+)*\.(?:com|net|org|info|edu|gov|io|co|me|tv|sa|ae|eg|ma|dz|qa|kw|jo|lb|iq|om|bh|ly|tn|sy|ye|sd)\b(?:/\S*)?)",
  };
}

PrefilterConfig PrefilterConfig::from_config(const KeyValueConfig& kv) {
  PrefilterConfig cfg;
  cfg.max_rank = static_cast<int>(kv.get_int("max_rank", cfg.max_rank));
  cfg.min_chars = static_cast<int>(kv.get_int("min_chars", cfg.min_chars));
  cfg.min_tokens = static_cast<int>(kv.get_int("min_tokens", cfg.min_tokens));
  cfg.max_token_diff = static_cast<int>(kv.get_int("max_token_diff", cfg.max_token_diff));
  cfg.max_token_run = static_cast<int>(kv.get_int("max_token_run", cfg.max_token_run));
  cfg.min_alnum_ratio = kv.get_double("min_alnum_ratio", cfg.min_alnum_ratio);
  cfg.min_arabic_ratio = kv.get_double("min_arabic_ratio", cfg.min_arabic_ratio);
  if (auto p = kv.get("site_blocklist"); p && !p->empty()) cfg.site_blocklist = *p;
  if (auto pats = kv.get("url_patterns")) cfg.url_patterns = tokenize(*pats);
  cfg.validate();
  return cfg;
}

void PrefilterConfig::validate() const {
  auto check_int = [](const char* name, int v) {
    if (v < 1) throw InputError(std::string(name) + " must be >= 1");
  };
  auto check_ratio = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in [0,1]");
  };
  check_int("max_rank", max_rank);
  check_int("min_chars", min_chars);
  check_int("min_tokens", min_tokens);
  check_int("max_token_diff", max_token_diff);
  check_int("max_token_run", max_token_run);
  check_ratio("min_alnum_ratio", min_alnum_ratio);
  check_ratio("min_arabic_ratio", min_arabic_ratio);
}

std::vector<std::string> default_site_names(const NormConfig& norm) {
  std::vector<std::string> names;
  for (const char* s : kBuiltinSites) names.push_back(normalize_text(s, norm));
  return names;
}

std::vector<std::string> load_site_blocklist(const std::filesystem::path& path,
                                             const NormConfig& norm) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read site blocklist: " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto name = normalize_text(line, norm);
    if (!name.empty()) names.push_back(std::move(name));
  }
  return names;
}

TokenSeq collapse_repeated_tokens(std::span<const std::string> tokens, int max_run) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
    if (j - i <= static_cast<std::size_t>(max_run)) {
      out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i),
                 tokens.begin() + static_cast<std::ptrdiff_t>(j));
    }
    i = j;
  }
  return out;
}

Verdict structural_filter(const CleanPair& pair, const PrefilterConfig& cfg) {
  const auto min_chars = static_cast<std::size_t>(cfg.min_chars);
  if (unicode::length(pair.query_text) < min_chars ||
      unicode::length(pair.title_text) < min_chars) {
    return Verdict::drop(filter_names::kMinChars);
  }
  const auto min_tokens = static_cast<std::size_t>(cfg.min_tokens);
  if (pair.query_tokens.size() < min_tokens || pair.title_tokens.size() < min_tokens) {
    return Verdict::drop(filter_names::kMinTokens);
  }
  const auto q = static_cast<long>(pair.query_tokens.size());
  const auto t = static_cast<long>(pair.title_tokens.size());
  if (std::abs(q - t) > cfg.max_token_diff) return Verdict::drop(filter_names::kTokenDiff);
  return Verdict::keep();
}

namespace {

struct CharsetCounts {
  std::size_t non_space = 0;
  std::size_t alnum = 0;
  std::size_t alpha = 0;
  std::size_t arabic_alpha = 0;
};

CharsetCounts count_charset(std::string_view text) {
  CharsetCounts c;
  for (char32_t cp : unicode::decode(text)) {
    if (unicode::is_whitespace(cp)) continue;
    ++c.non_space;
    if (unicode::is_alnum(cp)) ++c.alnum;
    if (unicode::is_alpha(cp)) {
      ++c.alpha;
      if (unicode::is_arabic_block(cp)) ++c.arabic_alpha;
    }
  }
  return c;
}

bool fails_alnum(const CharsetCounts& c, const PrefilterConfig& cfg) {
  return c.non_space == 0 || ratio_below(c.alnum, c.non_space, cfg.min_alnum_ratio);
}

bool fails_arabic(const CharsetCounts& c, const PrefilterConfig& cfg) {
  return c.alpha == 0 || ratio_below(c.arabic_alpha, c.alpha, cfg.min_arabic_ratio);
}

}  // namespace

Verdict charset_filter(std::string_view text, const PrefilterConfig& cfg) {
  const auto c = count_charset(text);
  if (fails_alnum(c, cfg)) return Verdict::drop(filter_names::kAlnumRatio);
  if (fails_arabic(c, cfg)) return Verdict::drop(filter_names::kArabicRatio);
  return Verdict::keep();
}

Verdict charset_filter(const CleanPair& pair, const PrefilterConfig& cfg) {
  const auto q = count_charset(pair.query_text);
  const auto t = count_charset(pair.title_text);
  if (fails_alnum(q, cfg) || fails_alnum(t, cfg)) return Verdict::drop(filter_names::kAlnumRatio);
  if (fails_arabic(q, cfg) || fails_arabic(t, cfg)) {
    return Verdict::drop(filter_names::kArabicRatio);
  }
  return Verdict::keep();
}

std::vector<QueryTitleRecord> keep_top_ranks(std::span<const QueryTitleRecord> records,
                                             const PrefilterConfig& cfg) {
  std::vector<QueryTitleRecord> out;
  for (const auto& r : records) {
    if (r.rank <= cfg.max_rank) out.push_back(r);
  }
  return out;
}

Prefilter::Prefilter(PrefilterConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& p : cfg_.url_patterns) {
    try {
      url_regexes_.emplace_back(p, std::regex::ECMAScript | std::regex::icase |
                                       std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw InputError("invalid url pattern '" + p + "': " + e.what());
    }
  }
  const auto names = cfg_.site_blocklist.empty()
                         ? default_site_names(cfg_.norm)
                         : load_site_blocklist(cfg_.site_blocklist, cfg_.norm);
  for (const auto& n : names) {
    auto toks = fold_tokens(tokenize(n));
    if (!toks.empty()) sites_.push_back(std::move(toks));
  }
  std::stable_sort(sites_.begin(), sites_.end(),
                   [](const TokenSeq& a, const TokenSeq& b) { return a.size() > b.size(); });
}

std::vector<std::string> Prefilter::filter_order() {
  return {std::string(filter_names::kTopRank),    std::string(filter_names::kMinChars),
          std::string(filter_names::kMinTokens),  std::string(filter_names::kTokenDiff),
          std::string(filter_names::kAlnumRatio), std::string(filter_names::kArabicRatio)};
}

std::string Prefilter::strip_punct_urls_sites(std::string_view text) const {
  std::string s(text);
  for (const auto& re : url_regexes_) s = std::regex_replace(s, re, " ");

  auto cps = unicode::decode(s);
  for (auto& c : cps) {
    if (unicode::is_punct(c)) c = U' ';
  }
  const TokenSeq tokens = tokenize(unicode::encode(cps));
  if (sites_.empty()) return join_tokens(tokens);

  const TokenSeq folded = fold_tokens(tokens);
  TokenSeq kept;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (const auto& site : sites_) {
      if (i + site.size() <= folded.size() &&
          std::equal(site.begin(), site.end(), folded.begin() + static_cast<std::ptrdiff_t>(i))) {
        matched = site.size();
        break;
      }
    }
    if (matched) {
      i += matched;
    } else {
      kept.push_back(tokens[i++]);
    }
  }
  return join_tokens(kept);
}

Verdict Prefilter::apply(const QueryTitleRecord& record, CleanPair* out) const {
  CleanPair pair;
  pair.id = record.id;
  pair.rank = record.rank;

  if (record.rank > cfg_.max_rank) {
    if (out) *out = std::move(pair);
    return Verdict::drop(filter_names::kTopRank);
  }

  auto clean_side = [&](const std::string& raw, std::string& text, TokenSeq& tokens) {
    const auto stripped = strip_punct_urls_sites(normalize_text(raw, cfg_.norm));
    tokens = collapse_repeated_tokens(tokenize(stripped), cfg_.max_token_run);
    text = join_tokens(tokens);
  };
  clean_side(record.query, pair.query_text, pair.query_tokens);
  clean_side(record.title, pair.title_text, pair.title_tokens);

  Verdict v = structural_filter(pair, cfg_);
  if (v.kept()) v = charset_filter(pair, cfg_);
  if (out) *out = std::move(pair);
  return v;
}

PrefilterResult Prefilter::run(std::span<const QueryTitleRecord> records) const {
  PrefilterResult result;
  result.report = FilterReport(filter_order());
  result.verdicts.reserve(records.size());
  for (const auto& rec : records) {
    result.report.record_input();
    CleanPair pair;
    const Verdict v = apply(rec, &pair);
    result.verdicts.push_back(v);
    if (v.kept()) {
      result.report.record_kept();
      result.kept.push_back(std::move(pair));
    } else {
      result.report.record_drop(std::string(v.dropped_by));
    }
  }
  return result;
}

}  // namespace qrw
