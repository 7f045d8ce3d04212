#include "qrw/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qrw/error.hpp"

namespace qrw {

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

BleuStats& BleuStats::operator-=(const BleuStats& o) {
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    matches[n] -= o.matches[n];
    totals[n] -= o.totals[n];
  }
  candidate_length -= o.candidate_length;
  reference_length -= o.reference_length;
  return *this;
}

namespace {

std::map<std::span<const std::string>, std::uint64_t,
         bool (*)(std::span<const std::string>, std::span<const std::string>)>
ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  auto less = +[](std::span<const std::string> a, std::span<const std::string> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };
  std::map<std::span<const std::string>, std::uint64_t, decltype(less)> counts(less);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[tokens.subspan(i, n)];
  return counts;
}

}  // namespace

BleuStats sentence_stats(std::span<const std::string> candidate,
                         std::span<const std::string> reference) {
  BleuStats s;
  s.candidate_length = candidate.size();
  s.reference_length = reference.size();
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    if (candidate.size() < n) break;
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    for (const auto& [g, c] : cand) {
      auto it = ref.find(g);
      if (it != ref.end()) s.matches[n - 1] += std::min(c, it->second);
    }
    s.totals[n - 1] = candidate.size() - n + 1;
  }
  return s;
}

double bleu_from_stats(const BleuStats& stats) {
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    if (stats.totals[n] == 0) continue;
    const double total = static_cast<double>(stats.totals[n]);
    const double p = stats.matches[n] > 0 ? static_cast<double>(stats.matches[n]) / total
                                          : 1.0 / (2.0 * total);
    log_sum += std::log(p);
    ++orders;
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / orders);
}

double corpus_bleu(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  if (candidates.size() != references.size()) {
    throw ContractError("corpus_bleu: " + std::to_string(candidates.size()) + " candidates vs " +
                        std::to_string(references.size()) + " references");
  }
  if (candidates.empty()) throw ContractError("corpus_bleu needs at least one sentence");
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    total += sentence_stats(candidates[i], references[i]);
  }
  return bleu_from_stats(total);
}

}  // namespace qrw
