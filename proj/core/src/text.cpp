#include "qrw/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include <charconv>

#include "qrw/error.hpp"

namespace qrw {

namespace unicode {

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    out.push_back(c < 0 ? char32_t{0xFFFD} : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size() * 2);
  for (char32_t c : code_points) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) {
      out += "\xEF\xBF\xBD";
    } else {
      out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
    }
  }
  return out;
}

std::size_t length(std::string_view utf8) {
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  std::size_t count = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    ++count;
  }
  return count;
}

bool is_whitespace(char32_t c) {
  return c == U'\t' || c == U'\n' || c == U'\r' || u_isUWhiteSpace(static_cast<UChar32>(c));
}

bool is_alnum(char32_t c) { return u_isalnum(static_cast<UChar32>(c)); }

bool is_alpha(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return u_ispunct(static_cast<UChar32>(c));
}

bool is_arabic_block(char32_t c) {
  return (c >= 0x0600 && c <= 0x06FF) || (c >= 0x0750 && c <= 0x077F) ||
         (c >= 0xFB50 && c <= 0xFDFF) || (c >= 0xFE70 && c <= 0xFEFF);
}

char32_t to_lower(char32_t c) {
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
}

}  // namespace unicode

namespace {

const icu::Normalizer2* normalizer_for(UnicodeForm form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = nullptr;
  switch (form) {
    case UnicodeForm::kNone:
      return nullptr;
    case UnicodeForm::kNfc:
      n = icu::Normalizer2::getNFCInstance(status);
      break;
    case UnicodeForm::kNfkc:
      n = icu::Normalizer2::getNFKCInstance(status);
      break;
  }
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalizer unavailable");
  return n;
}

bool is_latin(char32_t c) {
  UErrorCode status = U_ZERO_ERROR;
  return uscript_getScript(static_cast<UChar32>(c), &status) == USCRIPT_LATIN &&
         U_SUCCESS(status);
}

char32_t unify_arabic(char32_t c) {
  switch (c) {
    case 0x0622:  // alef with madda
    case 0x0623:  // alef with hamza above
    case 0x0625:  // alef with hamza below
      return 0x0627;
    case 0x0649:  // alef maqsura
      return 0x064A;
    case 0x0629:  // teh marbuta
      return 0x0647;
    default:
      return c;
  }
}

std::string normalize_once(std::string_view text, const NormConfig& cfg) {
  std::u32string cps;
  if (const auto* norm = normalizer_for(cfg.unicode_form)) {
    UErrorCode status = U_ZERO_ERROR;
    const auto src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    const icu::UnicodeString composed = norm->normalize(src, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
    std::string utf8;
    composed.toUTF8String(utf8);
    cps = unicode::decode(utf8);
  } else {
    cps = unicode::decode(text);
  }

  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (unicode::is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (cfg.strip_diacritics && c >= 0x064B && c <= 0x0652) continue;
    if (cfg.strip_tatweel && c == 0x0640) continue;
    if (cfg.arabic_letter_unification) c = unify_arabic(c);
    if (cfg.lowercase_latin && is_latin(c)) c = unicode::to_lower(c);
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return unicode::encode(out);
}

}  // namespace

std::string normalize_text(std::string_view text, const NormConfig& cfg) {
  // Removing marks can expose new canonical compositions (alef + madda), so
  // iterate to a fixpoint; each pass never lengthens the string.
  std::string current = normalize_once(text, cfg);
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = normalize_once(current, cfg);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq tokens;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::optional<QueryTitleRecord> parse_raw_row(std::string_view line, std::string id) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto t1 = line.find('\t');
  if (t1 == std::string_view::npos) return std::nullopt;
  const auto t2 = line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos) return std::nullopt;
  if (line.find('\t', t2 + 1) != std::string_view::npos) return std::nullopt;

  const auto query = line.substr(0, t1);
  const auto title = line.substr(t1 + 1, t2 - t1 - 1);
  const auto rank_text = line.substr(t2 + 1);
  if (tokenize(query).empty() || tokenize(title).empty()) return std::nullopt;

  int rank = 0;
  const auto [ptr, ec] =
      std::from_chars(rank_text.data(), rank_text.data() + rank_text.size(), rank);
  if (ec != std::errc{} || ptr != rank_text.data() + rank_text.size() || rank < 1) {
    return std::nullopt;
  }
  return QueryTitleRecord{std::string(query), std::string(title), rank, std::move(id)};
}

RawPairReader::RawPairReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open input file: " + path.string());
}

std::optional<QueryTitleRecord> RawPairReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    auto rec = parse_raw_row(line, "L" + std::to_string(line_no_));
    if (rec) {
      ++stats_.records;
      return rec;
    }
    ++stats_.malformed;
  }
  if (in_.bad()) throw IoError("read error on input file");
  return std::nullopt;
}

std::vector<QueryTitleRecord> load_raw_pairs(const std::filesystem::path& path,
                                             LoadStats* stats) {
  RawPairReader reader(path);
  std::vector<QueryTitleRecord> records;
  while (auto rec = reader.next()) records.push_back(std::move(*rec));
  if (stats) *stats = reader.stats();
  return records;
}

ParallelWriteCounts write_parallel(std::span<const ParallelPair> pairs,
                                   const std::filesystem::path& src_path,
                                   const std::filesystem::path& tgt_path) {
  std::ofstream src(src_path, std::ios::binary | std::ios::trunc);
  std::ofstream tgt(tgt_path, std::ios::binary | std::ios::trunc);
  if (!src) throw IoError("cannot write " + src_path.string());
  if (!tgt) throw IoError("cannot write " + tgt_path.string());
  ParallelWriteCounts counts;
  for (const auto& [s, t] : pairs) {
    if (s.empty() || t.empty()) {
      ++counts.dropped;
      continue;
    }
    src << join_tokens(s) << '\n';
    tgt << join_tokens(t) << '\n';
    ++counts.written;
  }
  src.flush();
  tgt.flush();
  if (!src || !tgt) throw IoError("write failed for parallel corpus");
  return counts;
}

std::vector<TokenSeq> read_sentences(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<TokenSeq> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(tokenize(line));
  return out;
}

std::vector<ParallelPair> read_parallel(const std::filesystem::path& src_path,
                                        const std::filesystem::path& tgt_path) {
  auto src = read_sentences(src_path);
  auto tgt = read_sentences(tgt_path);
  if (src.size() != tgt.size()) {
    throw FormatError("parallel files differ in line count: " + src_path.string() + " has " +
                      std::to_string(src.size()) + ", " + tgt_path.string() + " has " +
                      std::to_string(tgt.size()));
  }
  std::vector<ParallelPair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    pairs.emplace_back(std::move(src[i]), std::move(tgt[i]));
  }
  return pairs;
}

}  // namespace qrw
