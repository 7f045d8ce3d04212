#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qrw/bleu.hpp"
#include "qrw/decoder.hpp"

namespace qrw {

struct DevPair {
  TokenSeq query;
  TokenSeq reference;
};

struct PoolEntry {
  std::string surface;
  FeatureVector features{};
  BleuStats stats;
};

/// Hypotheses gathered for one dev sentence across iterations, distinct by
/// surface. Entries are never removed.
class SentencePool {
 public:
  explicit SentencePool(TokenSeq reference = {}) : reference_(std::move(reference)) {}

  /// Returns false when the surface is already pooled.
  bool add(const Hypothesis& h);
  bool add(std::string surface, const FeatureVector& features);

  const TokenSeq& reference() const { return reference_; }
  const std::vector<PoolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  TokenSeq reference_;
  std::vector<PoolEntry> entries_;
  std::unordered_set<std::string> surfaces_;
};

/// Index of the highest-scoring entry; the first one wins ties.
std::size_t pool_argmax(const SentencePool& pool, const FeatureWeights& weights);
double pooled_bleu(std::span<const SentencePool> pools, const FeatureWeights& weights);

/// score(gamma) = intercept + gamma * slope
struct Line {
  double intercept;
  double slope;
};

/// Entry `index` is the maximum on [start, next segment's start).
struct EnvelopeSegment {
  double start;
  std::size_t index;
};

/// Upper envelope of the lines, left to right; the first segment starts at
/// -infinity. Among identical lines the lowest index represents them.
std::vector<EnvelopeSegment> upper_envelope(std::span<const Line> lines);
std::size_t envelope_winner(std::span<const EnvelopeSegment> envelope, double gamma);

struct LineSearchResult {
  double gamma = 0.0;
  double bleu = 0.0;
};

/// Exact line search along weights + gamma * direction. Returns the
/// midpoint of the best BLEU interval (unbounded ends use a step of 1 past
/// the last boundary). When the interval holding 0 ties the best, gamma is
/// 0; otherwise the leftmost best interval wins.
LineSearchResult line_search(std::span<const SentencePool> pools, const FeatureWeights& weights,
                             const FeatureVector& direction);

struct MertOptions {
  int max_iters = 10;
  std::size_t nbest = 100;
  std::uint64_t seed = 42;
  int random_directions = 8;
  double min_gain = 1e-4;
  std::array<bool, kNumFeatures> tunable{true, true, true, true, true, true, true, true};
  int threads = 1;
};

struct MertStep {
  int iteration = 0;
  std::string direction;
  double gamma = 0.0;
  double bleu_before = 0.0;
  double bleu_after = 0.0;
};

struct MertResult {
  FeatureWeights weights;
  double bleu = 0.0;  // pooled BLEU of `weights` on the final pools
  int iterations = 0;
  std::vector<MertStep> steps;
  std::vector<SentencePool> pools;
};

/// Coordinate and random-direction ascent on fixed pools. Every accepted
/// step raises pooled BLEU by at least min_gain. Writes one
/// `iter<TAB>direction<TAB>gamma<TAB>bleu` line per accepted step to `log`.
FeatureWeights optimize_weights(std::span<const SentencePool> pools, FeatureWeights weights,
                                const MertOptions& opts, std::mt19937_64& rng,
                                int iteration, std::vector<MertStep>* steps,
                                std::ostream* log);

using DecodeFn = std::function<NBestList(std::span<const std::string> query,
                                         const FeatureWeights& weights, std::size_t n)>;

/// Full MERT: decode, pool, optimize, repeat until no new hypotheses or
/// max_iters. Returns the best weights seen on the final pools.
MertResult mert_tune(const DecodeFn& decode_fn, std::span<const DevPair> dev,
                     const FeatureWeights& initial, const MertOptions& opts,
                     std::ostream* log = nullptr);

}  // namespace qrw
