#include "qrw/stemmer.hpp"

#include <algorithm>
#include <array>

#include "qrw/text.hpp"

namespace qrw {
namespace {

// Longest first within each list.
const std::array<std::u32string_view, 6> kArticles = {
    U"وال", U"بال", U"كال", U"فال", U"ال", U"لل",
};
const std::array<std::u32string_view, 10> kSuffixes = {
    U"ها", U"ان", U"ات", U"ون", U"ين", U"يه", U"ية", U"ه", U"ة", U"ي",
};

bool starts_with(std::u32string_view s, std::u32string_view p) {
  return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

bool ends_with(std::u32string_view s, std::u32string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

}  // namespace

std::string ArabicLightStemmer::stem(std::string_view token) const {
  std::u32string cps = unicode::decode(token);
  const bool arabic = std::any_of(cps.begin(), cps.end(), [](char32_t c) {
    return unicode::is_arabic_block(c) && unicode::is_alpha(c);
  });
  if (!arabic) {
    for (auto& c : cps) c = unicode::to_lower(c);
    return unicode::encode(cps);
  }
  if (cps.size() < 4) return std::string(token);

  std::u32string_view s = cps;
  if (s.front() == U'و' && s.size() >= 4) s.remove_prefix(1);

  std::size_t best = 0;
  for (auto art : kArticles) {
    if (art.size() > best && starts_with(s, art) && s.size() - art.size() >= 2) {
      best = art.size();
    }
  }
  s.remove_prefix(best);

  best = 0;
  for (auto suf : kSuffixes) {
    if (suf.size() > best && ends_with(s, suf) && s.size() - suf.size() >= 2) {
      best = suf.size();
    }
  }
  s.remove_suffix(best);
  return unicode::encode(s);
}

StemSet make_stem_set(std::span<const std::string> tokens, const Stemmer& stemmer) {
  StemSet set;
  for (const auto& t : tokens) {
    auto s = stemmer.stem(t);
    if (!s.empty()) set.stems.insert(std::move(s));
  }
  return set;
}

double jaccard_index(const StemSet& q, const StemSet& t) {
  std::size_t inter = 0;
  auto a = q.stems.begin();
  auto b = t.stems.begin();
  while (a != q.stems.end() && b != t.stems.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++inter;
      ++a;
      ++b;
    }
  }
  const std::size_t uni = q.stems.size() + t.stems.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace qrw
