#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>

namespace qrw {

class Stemmer {
 public:
  virtual ~Stemmer() = default;
  virtual std::string stem(std::string_view token) const = 0;
};

/// Rule-based Arabic light stemmer over normalized tokens.
///
/// Tokens with no Arabic letter are returned lowercased; tokens shorter than
/// four code points are returned unchanged. Otherwise, in order:
///   1. a leading conjunction و is removed when at least three letters remain;
///   2. the longest of ال, وال, بال, كال, فال, لل is removed when at least two
///      letters remain;
///   3. the longest matching suffix among ها ان ات ون ين يه ية ه ة ي is removed
///      once, when at least two letters remain.
class ArabicLightStemmer final : public Stemmer {
 public:
  std::string stem(std::string_view token) const override;
};

struct StemSet {
  std::set<std::string> stems;
};

StemSet make_stem_set(std::span<const std::string> tokens, const Stemmer& stemmer);

/// |Q ∩ T| / |Q ∪ T|; 0 when both sets are empty.
double jaccard_index(const StemSet& q, const StemSet& t);

}  // namespace qrw
