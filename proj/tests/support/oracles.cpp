#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace qrw::testing {

std::vector<PhraseSpan> brute_force_spans(const AlignmentMatrix& a, std::size_t max_len) {
  const std::size_t I = a.source_length(), J = a.target_length();
  std::vector<PhraseSpan> out;
  for (std::size_t i1 = 0; i1 < I; ++i1) {
    for (std::size_t i2 = i1 + 1; i2 <= I && i2 - i1 <= max_len; ++i2) {
      for (std::size_t j1 = 0; j1 < J; ++j1) {
        for (std::size_t j2 = j1 + 1; j2 <= J && j2 - j1 <= max_len; ++j2) {
          bool inside = false, crossing = false;
          for (std::size_t i = 0; i < I; ++i) {
            for (std::size_t j = 0; j < J; ++j) {
              if (!a.contains(i, j)) continue;
              const bool in_i = i >= i1 && i < i2;
              const bool in_j = j >= j1 && j < j2;
              if (in_i && in_j) inside = true;
              if (in_i != in_j) crossing = true;
            }
          }
          if (inside && !crossing) {
            out.push_back({static_cast<std::uint32_t>(i1), static_cast<std::uint32_t>(i2),
                           static_cast<std::uint32_t>(j1), static_cast<std::uint32_t>(j2)});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Derivation> enumerate_derivations(const PhraseTable& table,
                                              const lm::TrigramModel& lm,
                                              const FeatureWeights& weights,
                                              std::span<const std::string> query,
                                              std::size_t distortion_limit) {
  const std::size_t n = query.size();
  auto flog = [](double p) { return std::log(std::max(p, 1e-12)); };

  struct Choice {
    std::size_t b, e;
    TokenSeq tokens;
    FeatureVector f{};
  };
  std::vector<Choice> choices;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t e = b + 1; e <= n; ++e) {
      const std::string src =
          join_tokens(std::span<const std::string>(query.begin() + b, query.begin() + e));
      bool found = false;
      for (const auto& [key, sc] : table.entries()) {
        if (key.first != src) continue;
        found = true;
        Choice c{b, e, tokenize(key.second), {}};
        c.f[kTmFwd] = flog(sc.phi_ts);
        c.f[kTmRev] = flog(sc.phi_st);
        c.f[kLexFwd] = flog(sc.lex_ts);
        c.f[kLexRev] = flog(sc.lex_st);
        c.f[kWordPenalty] = -static_cast<double>(c.tokens.size());
        c.f[kPhrasePenalty] = -1.0;
        choices.push_back(std::move(c));
      }
      if (!found && e == b + 1) {
        Choice c{b, e, {query[b]}, {}};
        c.f[kWordPenalty] = -1.0;
        c.f[kPhrasePenalty] = -1.0;
        choices.push_back(std::move(c));
      }
    }
  }

  std::vector<Derivation> out;
  std::vector<bool> covered(n, false);
  TokenSeq tokens;
  std::function<void(std::size_t, std::size_t, FeatureVector)> rec =
      [&](std::size_t done, std::size_t prev_end, FeatureVector f) {
        if (done == n) {
          Derivation d;
          d.features = f;
          d.features[kLm] = lm.sentence_logprob(tokens);
          d.surface = join_tokens(tokens);
          for (std::size_t k = 0; k < kNumFeatures; ++k) {
            d.score += d.features[k] * weights.values[k];
          }
          out.push_back(std::move(d));
          return;
        }
        for (const auto& c : choices) {
          bool free = true;
          for (std::size_t i = c.b; i < c.e; ++i) free = free && !covered[i];
          if (!free) continue;
          const std::size_t jump = c.b > prev_end ? c.b - prev_end : prev_end - c.b;
          if (jump > distortion_limit) continue;
          for (std::size_t i = c.b; i < c.e; ++i) covered[i] = true;
          const std::size_t mark = tokens.size();
          tokens.insert(tokens.end(), c.tokens.begin(), c.tokens.end());
          FeatureVector g = f;
          for (std::size_t k = 0; k < kNumFeatures; ++k) g[k] += c.f[k];
          g[kDistortion] -= static_cast<double>(jump);
          rec(done + (c.e - c.b), c.e, g);
          tokens.resize(mark);
          for (std::size_t i = c.b; i < c.e; ++i) covered[i] = false;
        }
      };
  rec(0, 0, FeatureVector{});
  return out;
}

Derivation best_derivation(const std::vector<Derivation>& all) {
  const Derivation* best = nullptr;
  for (const auto& d : all) {
    if (!best || d.score > best->score ||
        (d.score == best->score && d.surface < best->surface)) {
      best = &d;
    }
  }
  return best ? *best : Derivation{};
}

KneserNeyOracle::KneserNeyOracle(const std::vector<TokenSeq>& corpus, double discount)
    : d_(discount) {
  std::set<std::string> vocab{"<unk>", "</s>"};
  for (const auto& s : corpus) {
    Key padded{"<s>", "<s>"};
    for (const auto& w : s) {
      padded.push_back(w);
      vocab.insert(w);
    }
    padded.push_back("</s>");
    for (std::size_t i = 2; i < padded.size(); ++i) {
      trigram_[{padded[i - 2], padded[i - 1], padded[i]}] += 1;
    }
  }
  predictable_.assign(vocab.begin(), vocab.end());

  for (const auto& [k, c] : trigram_) {
    context_total_[{k[0], k[1]}] += c;
    context_types_[{k[0], k[1]}] += 1;
    left_of_pair_[{k[1], k[2]}] += 1;
  }
  for (const auto& [k, n] : left_of_pair_) {
    mid_total_[k[0]] += n;
    mid_types_[k[0]] += 1;
    left_of_word_[k[1]] += 1;
    pair_types_ += 1;
  }
  word_types_ = static_cast<double>(left_of_word_.size());
}

double KneserNeyOracle::p1(const std::string& w) const {
  auto it = left_of_word_.find(w);
  const double n = it == left_of_word_.end() ? 0.0 : it->second;
  return std::max(n - d_, 0.0) / pair_types_ +
         d_ * word_types_ / pair_types_ / static_cast<double>(predictable_.size());
}

double KneserNeyOracle::p2(const std::string& v, const std::string& w) const {
  auto tot = mid_total_.find(v);
  if (tot == mid_total_.end()) return p1(w);
  auto it = left_of_pair_.find({v, w});
  const double n = it == left_of_pair_.end() ? 0.0 : it->second;
  return std::max(n - d_, 0.0) / tot->second +
         d_ * mid_types_.at(v) / tot->second * p1(w);
}

double KneserNeyOracle::prob(const std::string& u, const std::string& v,
                             const std::string& w) const {
  auto tot = context_total_.find({u, v});
  if (tot == context_total_.end()) return p2(v, w);
  auto it = trigram_.find({u, v, w});
  const double c = it == trigram_.end() ? 0.0 : it->second;
  return std::max(c - d_, 0.0) / tot->second +
         d_ * context_types_.at({u, v}) / tot->second * p2(v, w);
}

}  // namespace qrw::testing
