#include "qrw/mert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <thread>

#include "qrw/error.hpp"

namespace qrw {

// ------------------------------------------------------------ SentencePool

bool SentencePool::add(const Hypothesis& h) { return add(h.surface, h.features); }

bool SentencePool::add(std::string surface, const FeatureVector& features) {
  if (!surfaces_.insert(surface).second) return false;
  PoolEntry e;
  e.stats = sentence_stats(tokenize(surface), reference_);
  e.surface = std::move(surface);
  e.features = features;
  entries_.push_back(std::move(e));
  return true;
}

std::size_t pool_argmax(const SentencePool& pool, const FeatureWeights& weights) {
  if (pool.size() == 0) throw ContractError("empty hypothesis pool");
  std::size_t best = 0;
  double best_score = score_hypothesis(pool.entries()[0].features, weights);
  for (std::size_t k = 1; k < pool.size(); ++k) {
    const double s = score_hypothesis(pool.entries()[k].features, weights);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

double pooled_bleu(std::span<const SentencePool> pools, const FeatureWeights& weights) {
  BleuStats total;
  for (const auto& p : pools) total += p.entries()[pool_argmax(p, weights)].stats;
  return bleu_from_stats(total);
}

// ---------------------------------------------------------------- envelope

std::vector<EnvelopeSegment> upper_envelope(std::span<const Line> lines) {
  if (lines.empty()) throw ContractError("upper_envelope needs at least one line");
  std::vector<std::size_t> order(lines.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lines[a].slope != lines[b].slope) return lines[a].slope < lines[b].slope;
    if (lines[a].intercept != lines[b].intercept) return lines[a].intercept > lines[b].intercept;
    return a < b;
  });

  std::vector<EnvelopeSegment> hull;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t idx = order[k];
    if (k > 0 && lines[order[k - 1]].slope == lines[idx].slope) continue;
    const Line& l = lines[idx];
    double x = kNegInf;
    while (!hull.empty()) {
      const Line& top = lines[hull.back().index];
      x = (top.intercept - l.intercept) / (l.slope - top.slope);
      if (x <= hull.back().start) {
        hull.pop_back();
        x = kNegInf;
      } else {
        break;
      }
    }
    hull.push_back({hull.empty() ? kNegInf : x, idx});
  }
  return hull;
}

std::size_t envelope_winner(std::span<const EnvelopeSegment> envelope, double gamma) {
  if (envelope.empty()) throw ContractError("empty envelope");
  auto it = std::upper_bound(envelope.begin(), envelope.end(), gamma,
                             [](double g, const EnvelopeSegment& s) { return g < s.start; });
  return std::prev(it)->index;
}

LineSearchResult line_search(std::span<const SentencePool> pools, const FeatureWeights& weights,
                             const FeatureVector& direction) {
  if (pools.empty()) throw ContractError("line search needs at least one pool");
  if (std::all_of(direction.begin(), direction.end(), [](double d) { return d == 0.0; })) {
    throw ContractError("line search direction is zero");
  }
  FeatureWeights dir_w;
  dir_w.values = direction;

  struct Event {
    double at;
    std::size_t sentence;
    std::size_t entry;
  };
  std::vector<Event> events;
  BleuStats stats;
  std::vector<std::size_t> current(pools.size());
  for (std::size_t s = 0; s < pools.size(); ++s) {
    const auto& entries = pools[s].entries();
    if (entries.empty()) throw ContractError("empty hypothesis pool");
    std::vector<Line> lines;
    lines.reserve(entries.size());
    for (const auto& e : entries) {
      lines.push_back({score_hypothesis(e.features, weights), score_hypothesis(e.features, dir_w)});
    }
    const auto env = upper_envelope(lines);
    current[s] = env.front().index;
    stats += entries[current[s]].stats;
    for (std::size_t k = 1; k < env.size(); ++k) events.push_back({env[k].start, s, env[k].index});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.at != b.at) return a.at < b.at;
    return a.sentence < b.sentence;
  });

  // Interval i spans [boundary[i-1], boundary[i]) with open ends at +-inf.
  std::vector<double> boundaries;
  std::vector<double> interval_bleu;
  std::size_t e = 0;
  interval_bleu.push_back(bleu_from_stats(stats));
  while (e < events.size()) {
    const double at = events[e].at;
    while (e < events.size() && events[e].at == at) {
      const auto& ev = events[e];
      stats -= pools[ev.sentence].entries()[current[ev.sentence]].stats;
      current[ev.sentence] = ev.entry;
      stats += pools[ev.sentence].entries()[ev.entry].stats;
      ++e;
    }
    boundaries.push_back(at);
    interval_bleu.push_back(bleu_from_stats(stats));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < interval_bleu.size(); ++i) {
    if (interval_bleu[i] > interval_bleu[best]) best = i;
  }
  const std::size_t zero_interval = static_cast<std::size_t>(
      std::upper_bound(boundaries.begin(), boundaries.end(), 0.0) - boundaries.begin());
  if (interval_bleu[zero_interval] == interval_bleu[best]) return {0.0, interval_bleu[best]};

  double gamma;
  if (boundaries.empty()) {
    gamma = 0.0;
  } else if (best == 0) {
    gamma = boundaries.front() - 1.0;
  } else if (best == boundaries.size()) {
    gamma = boundaries.back() + 1.0;
  } else {
    gamma = 0.5 * (boundaries[best - 1] + boundaries[best]);
  }
  return {gamma, interval_bleu[best]};
}

// ------------------------------------------------------------------ tuning

namespace {

double uniform_pm1(std::mt19937_64& rng) {
  // 53 random bits mapped to [-1, 1), identical on every platform.
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

FeatureWeights optimize_weights(std::span<const SentencePool> pools, FeatureWeights weights,
                                const MertOptions& opts, std::mt19937_64& rng, int iteration,
                                std::vector<MertStep>* steps, std::ostream* log) {
  const bool all_tunable =
      std::all_of(opts.tunable.begin(), opts.tunable.end(), [](bool t) { return t; });
  double current = pooled_bleu(pools, weights);
  while (true) {
    struct Candidate {
      std::string id;
      FeatureVector dir;
    };
    std::vector<Candidate> dirs;
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      if (!opts.tunable[k]) continue;
      FeatureVector d{};
      d[k] = 1.0;
      dirs.push_back({"axis:" + std::string(feature_names()[k]), d});
    }
    for (int r = 0; r < opts.random_directions; ++r) {
      FeatureVector d{};
      bool nonzero = false;
      for (std::size_t k = 0; k < kNumFeatures; ++k) {
        const double v = uniform_pm1(rng);
        if (opts.tunable[k]) {
          d[k] = v;
          nonzero = nonzero || v != 0.0;
        }
      }
      if (nonzero) dirs.push_back({"random:" + std::to_string(r), d});
    }
    if (dirs.empty()) break;

    const Candidate* best_dir = nullptr;
    LineSearchResult best{0.0, current};
    for (const auto& c : dirs) {
      const auto r = line_search(pools, weights, c.dir);
      if (r.bleu > best.bleu) {
        best = r;
        best_dir = &c;
      }
    }
    if (!best_dir || best.gamma == 0.0) break;

    FeatureWeights next = weights;
    for (std::size_t k = 0; k < kNumFeatures; ++k) next[k] += best.gamma * best_dir->dir[k];
    if (all_tunable) {
      double l1 = 0.0;
      for (double v : next.values) l1 += std::abs(v);
      if (l1 > 0.0) {
        for (double& v : next.values) v /= l1;
      }
    }
    try {
      next.validate();
    } catch (const ContractError&) {
      break;
    }
    const double after = pooled_bleu(pools, next);
    if (after - current < opts.min_gain) break;

    if (steps) steps->push_back({iteration, best_dir->id, best.gamma, current, after});
    if (log) {
      *log << iteration << '\t' << best_dir->id << '\t' << format_double(best.gamma) << '\t'
           << format_double(after) << '\n';
    }
    weights = next;
    current = after;
  }
  return weights;
}

MertResult mert_tune(const DecodeFn& decode_fn, std::span<const DevPair> dev,
                     const FeatureWeights& initial, const MertOptions& opts, std::ostream* log) {
  if (dev.empty()) throw ContractError("MERT needs a non-empty dev set");
  for (const auto& d : dev) {
    if (d.query.empty() || d.reference.empty()) {
      throw ContractError("dev pairs need a non-empty query and reference");
    }
  }
  initial.validate();
  if (opts.nbest == 0) throw ContractError("MERT n-best size must be >= 1");

  MertResult result;
  result.weights = initial;
  if (log) *log << "# seed\t" << opts.seed << '\n';
  if (opts.max_iters <= 0) return result;

  for (const auto& d : dev) result.pools.emplace_back(d.reference);
  std::mt19937_64 rng(opts.seed);
  std::vector<FeatureWeights> history{initial};
  FeatureWeights weights = initial;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    std::vector<NBestList> nbests(dev.size());
    const std::size_t workers = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.threads, 1)),
                                 dev.size()));
    if (workers == 1) {
      for (std::size_t i = 0; i < dev.size(); ++i) {
        nbests[i] = decode_fn(dev[i].query, weights, opts.nbest);
      }
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < dev.size(); i += workers) {
              nbests[i] = decode_fn(dev[i].query, weights, opts.nbest);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    std::size_t added = 0;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      for (const auto& h : nbests[i]) added += result.pools[i].add(h) ? 1 : 0;
    }
    for (const auto& p : result.pools) {
      if (p.size() == 0) throw ContractError("decoder returned no hypotheses for a dev query");
    }
    result.iterations = iter;
    if (added == 0) break;

    const std::size_t before = result.steps.size();
    weights = optimize_weights(result.pools, weights, opts, rng, iter, &result.steps, log);
    if (result.steps.size() > before) history.push_back(weights);
  }

  double best_bleu = -1.0;
  for (const auto& w : history) {
    const double b = pooled_bleu(result.pools, w);
    if (b > best_bleu) {
      best_bleu = b;
      result.weights = w;
    }
  }
  result.bleu = best_bleu;
  return result;
}

}  // namespace qrw
