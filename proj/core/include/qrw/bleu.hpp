#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "qrw/text.hpp"

namespace qrw {

inline constexpr std::size_t kBleuOrder = 4;

/// Additive BLEU sufficient statistics.
struct BleuStats {
  std::array<std::uint64_t, kBleuOrder> matches{};  // clipped
  std::array<std::uint64_t, kBleuOrder> totals{};   // candidate n-grams
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& o);
  BleuStats& operator-=(const BleuStats& o);
  bool operator==(const BleuStats&) const = default;
};

BleuStats sentence_stats(std::span<const std::string> candidate,
                         std::span<const std::string> reference);

/// BLEU-4 from summed statistics. Orders with no candidate n-gram are left
/// out of the geometric mean; a zero match count is floored at
/// 1 / (2 * candidate n-grams). Empty candidates score 0.
double bleu_from_stats(const BleuStats& stats);

/// Throws ContractError on a length mismatch or empty input.
double corpus_bleu(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);

}  // namespace qrw
