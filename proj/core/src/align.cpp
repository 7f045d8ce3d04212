#include "qrw/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include "qrw/error.hpp"

namespace qrw {

// ------------------------------------------------------- TranslationTable

std::uint32_t TranslationTable::intern(std::vector<std::string>& words,
                                       std::unordered_map<std::string, std::uint32_t>& index,
                                       std::string_view w) {
  auto it = index.find(std::string(w));
  if (it != index.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(words.size());
  words.emplace_back(w);
  index.emplace(words.back(), id);
  return id;
}

double TranslationTable::prob(std::string_view source, std::string_view target) const {
  auto s = src_index_.find(std::string(source));
  if (s == src_index_.end()) return 0.0;
  auto t = tgt_index_.find(std::string(target));
  if (t == tgt_index_.end()) return 0.0;
  auto it = probs_.find(key(s->second, t->second));
  return it == probs_.end() ? 0.0 : it->second;
}

void TranslationTable::set(std::string_view source, std::string_view target, double p) {
  const auto s = intern(src_words_, src_index_, source);
  const auto t = intern(tgt_words_, tgt_index_, target);
  probs_[key(s, t)] = p;
}

double TranslationTable::row_sum(std::string_view source) const {
  auto s = src_index_.find(std::string(source));
  if (s == src_index_.end()) return 0.0;
  double sum = 0.0;
  for (const auto& [k, p] : probs_) {
    if ((k >> 32) == s->second) sum += p;
  }
  return sum;
}

std::vector<std::string> TranslationTable::sources() const {
  std::vector<std::string> out = src_words_;
  std::sort(out.begin(), out.end());
  return out;
}

void TranslationTable::dump(std::ostream& out) const {
  std::vector<std::tuple<std::string_view, std::string_view, double>> rows;
  rows.reserve(probs_.size());
  for (const auto& [k, p] : probs_) {
    rows.emplace_back(src_words_[k >> 32], tgt_words_[k & 0xFFFFFFFFu], p);
  }
  std::sort(rows.begin(), rows.end());
  char buf[40];
  for (const auto& [s, t, p] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out << s << '\t' << t << '\t' << buf << '\n';
  }
}

void TranslationTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write translation table: " + path.string());
  dump(out);
}

TranslationTable TranslationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read translation table: " + path.string());
  TranslationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw FormatError("expected source<TAB>target<TAB>prob", line_no);
    try {
      std::size_t used = 0;
      const std::string num = line.substr(t2 + 1);
      const double p = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
      table.set(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), p);
    } catch (const std::logic_error&) {
      throw FormatError("bad probability", line_no);
    }
  }
  return table;
}

// ----------------------------------------------------------------- Model 1

namespace {

struct EncodedPair {
  std::uint32_t src_len;  // including the null word when enabled
  std::uint32_t tgt_len;
  std::vector<std::uint32_t> param;  // src_len x tgt_len indices into the parameter vector
};

struct EStepResult {
  std::vector<double> counts;
  double log_likelihood = 0.0;
};

void e_step_range(std::span<const EncodedPair> pairs, const std::vector<double>& t,
                  EStepResult& out) {
  constexpr double kFloor = 1e-12;
  for (const auto& p : pairs) {
    const double log_norm = std::log(static_cast<double>(p.src_len));
    for (std::uint32_t j = 0; j < p.tgt_len; ++j) {
      double z = 0.0;
      for (std::uint32_t i = 0; i < p.src_len; ++i) z += t[p.param[i * p.tgt_len + j]];
      z = std::max(z, kFloor);
      out.log_likelihood += std::log(z) - log_norm;
      for (std::uint32_t i = 0; i < p.src_len; ++i) {
        const auto k = p.param[i * p.tgt_len + j];
        out.counts[k] += t[k] / z;
      }
    }
  }
}

EStepResult e_step(const std::vector<EncodedPair>& pairs, const std::vector<double>& t,
                   int threads, bool want_counts) {
  const std::size_t n_chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads),
                                                     pairs.size()));
  std::vector<EStepResult> parts(n_chunks);
  for (auto& part : parts) part.counts.assign(want_counts ? t.size() : t.size(), 0.0);
  const std::size_t per = (pairs.size() + n_chunks - 1) / n_chunks;
  auto run = [&](std::size_t c) {
    const std::size_t b = std::min(pairs.size(), c * per);
    const std::size_t e = std::min(pairs.size(), b + per);
    e_step_range(std::span(pairs).subspan(b, e - b), t, parts[c]);
  };
  if (n_chunks == 1) {
    run(0);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t c = 0; c < n_chunks; ++c) workers.emplace_back(run, c);
    for (auto& w : workers) w.join();
  }
  // Merge in chunk order for reproducibility.
  EStepResult total = std::move(parts[0]);
  for (std::size_t c = 1; c < n_chunks; ++c) {
    total.log_likelihood += parts[c].log_likelihood;
    for (std::size_t k = 0; k < total.counts.size(); ++k) total.counts[k] += parts[c].counts[k];
  }
  return total;
}

}  // namespace

Model1Result train_model1(std::span<const ParallelPair> corpus, const Model1Options& opts) {
  if (corpus.empty()) throw ContractError("cannot train Model 1 on an empty corpus");
  if (opts.iterations < 0) throw ContractError("iterations must be >= 0");

  // Source ids: null is 0 when enabled; sorted vocabularies keep the
  // parameter layout independent of sentence order.
  std::vector<std::string> src_vocab, tgt_vocab;
  {
    std::map<std::string, int> s, t;
    for (const auto& [src, tgt] : corpus) {
      if (src.empty() || tgt.empty()) {
        throw ContractError("Model 1 training pair has an empty side");
      }
      for (const auto& w : src) s[w];
      for (const auto& w : tgt) t[w];
    }
    if (opts.use_null) src_vocab.emplace_back(kNullToken);
    for (const auto& [w, _] : s) src_vocab.push_back(w);
    for (const auto& [w, _] : t) tgt_vocab.push_back(w);
  }
  std::unordered_map<std::string, std::uint32_t> src_id, tgt_id;
  for (std::uint32_t i = 0; i < src_vocab.size(); ++i) src_id.emplace(src_vocab[i], i);
  for (std::uint32_t i = 0; i < tgt_vocab.size(); ++i) tgt_id.emplace(tgt_vocab[i], i);

  auto pkey = [](std::uint32_t s, std::uint32_t t) { return (std::uint64_t{s} << 32) | t; };

  std::vector<std::uint64_t> keys;
  for (const auto& [src, tgt] : corpus) {
    std::vector<std::uint32_t> s_ids;
    if (opts.use_null) s_ids.push_back(0);
    for (const auto& w : src) s_ids.push_back(src_id.at(w));
    for (auto s : s_ids) {
      for (const auto& w : tgt) keys.push_back(pkey(s, tgt_id.at(w)));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::unordered_map<std::uint64_t, std::uint32_t> param_of;
  param_of.reserve(keys.size());
  for (std::uint32_t k = 0; k < keys.size(); ++k) param_of.emplace(keys[k], k);

  std::vector<EncodedPair> encoded;
  encoded.reserve(corpus.size());
  for (const auto& [src, tgt] : corpus) {
    EncodedPair e;
    std::vector<std::uint32_t> s_ids;
    if (opts.use_null) s_ids.push_back(0);
    for (const auto& w : src) s_ids.push_back(src_id.at(w));
    e.src_len = static_cast<std::uint32_t>(s_ids.size());
    e.tgt_len = static_cast<std::uint32_t>(tgt.size());
    e.param.reserve(s_ids.size() * tgt.size());
    for (auto s : s_ids) {
      for (const auto& w : tgt) e.param.push_back(param_of.at(pkey(s, tgt_id.at(w))));
    }
    encoded.push_back(std::move(e));
  }

  // Source rows are contiguous because keys are sorted source-major.
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t b = 0; b < keys.size();) {
    std::size_t e = b;
    while (e < keys.size() && (keys[e] >> 32) == (keys[b] >> 32)) ++e;
    rows.emplace_back(b, e);
    b = e;
  }

  std::vector<double> t(keys.size());
  for (const auto& [b, e] : rows) {
    const double u = 1.0 / static_cast<double>(e - b);
    for (std::size_t k = b; k < e; ++k) t[k] = u;
  }

  Model1Result result;
  for (int it = 0; it < opts.iterations; ++it) {
    EStepResult es = e_step(encoded, t, opts.threads, true);
    result.log_likelihood.push_back(es.log_likelihood);
    for (const auto& [b, e] : rows) {
      double total = 0.0;
      for (std::size_t k = b; k < e; ++k) total += es.counts[k];
      for (std::size_t k = b; k < e; ++k) t[k] = total > 0.0 ? es.counts[k] / total : 0.0;
    }
  }
  result.log_likelihood.push_back(e_step(encoded, t, opts.threads, false).log_likelihood);

  for (std::size_t k = 0; k < keys.size(); ++k) {
    result.table.set(src_vocab[keys[k] >> 32], tgt_vocab[keys[k] & 0xFFFFFFFFu], t[k]);
  }
  return result;
}

// --------------------------------------------------------- AlignmentMatrix

AlignmentMatrix::AlignmentMatrix(std::size_t source_length, std::size_t target_length)
    : rows_(source_length), cols_(target_length), grid_(source_length * target_length, 0) {}

void AlignmentMatrix::add(std::size_t i, std::size_t j) {
  if (i >= rows_ || j >= cols_) {
    throw ContractError("alignment link (" + std::to_string(i) + "," + std::to_string(j) +
                        ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  auto& cell = grid_[i * cols_ + j];
  if (!cell) {
    cell = 1;
    ++count_;
  }
}

bool AlignmentMatrix::contains(std::size_t i, std::size_t j) const {
  return i < rows_ && j < cols_ && grid_[i * cols_ + j];
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> AlignmentMatrix::links() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (grid_[i * cols_ + j]) {
        out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    }
  }
  return out;
}

AlignmentMatrix AlignmentMatrix::transposed() const {
  AlignmentMatrix t(cols_, rows_);
  for (const auto& [i, j] : links()) t.add(j, i);
  return t;
}

std::string AlignmentMatrix::to_string() const {
  std::string out;
  for (const auto& [i, j] : links()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + '-' + std::to_string(j);
  }
  return out;
}

AlignmentMatrix AlignmentMatrix::parse(std::string_view line, std::size_t source_length,
                                       std::size_t target_length) {
  AlignmentMatrix m(source_length, target_length);
  for (const auto& item : tokenize(line)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw FormatError("alignment link must be i-j: " + item);
    try {
      m.add(std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1)));
    } catch (const ContractError&) {
      throw FormatError("alignment link out of bounds: " + item);
    } catch (const std::logic_error&) {
      throw FormatError("alignment link must be i-j: " + item);
    }
  }
  return m;
}

AlignmentMatrix viterbi_align(const TranslationTable& table, std::span<const std::string> source,
                              std::span<const std::string> target) {
  AlignmentMatrix a(source.size(), target.size());
  for (std::size_t j = 0; j < target.size(); ++j) {
    double best = table.prob(kNullToken, target[j]);
    std::size_t best_i = source.size();
    for (std::size_t i = 0; i < source.size(); ++i) {
      const double p = table.prob(source[i], target[j]);
      if (p > best) {
        best = p;
        best_i = i;
      }
    }
    if (best_i < source.size()) a.add(best_i, j);
  }
  return a;
}

AlignmentMatrix symmetrize(const AlignmentMatrix& fwd, const AlignmentMatrix& rev) {
  if (rev.source_length() != fwd.target_length() || rev.target_length() != fwd.source_length()) {
    throw ContractError("symmetrize: reverse alignment dimensions do not match forward");
  }
  const std::size_t I = fwd.source_length();
  const std::size_t J = fwd.target_length();
  const AlignmentMatrix rev_t = rev.transposed();

  AlignmentMatrix out(I, J);
  std::vector<bool> src_aligned(I, false), tgt_aligned(J, false);
  auto add = [&](std::size_t i, std::size_t j) {
    out.add(i, j);
    src_aligned[i] = true;
    tgt_aligned[j] = true;
  };
  auto in_union = [&](std::size_t i, std::size_t j) {
    return fwd.contains(i, j) || rev_t.contains(i, j);
  };

  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      if (fwd.contains(i, j) && rev_t.contains(i, j)) add(i, j);
    }
  }

  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0},  {0, 1},
                                           {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        if (!out.contains(i, j)) continue;
        for (const auto& d : kNeighbors) {
          const long ni = static_cast<long>(i) + d[0];
          const long nj = static_cast<long>(j) + d[1];
          if (ni < 0 || nj < 0 || ni >= static_cast<long>(I) || nj >= static_cast<long>(J)) {
            continue;
          }
          const auto ui = static_cast<std::size_t>(ni);
          const auto uj = static_cast<std::size_t>(nj);
          if ((!src_aligned[ui] || !tgt_aligned[uj]) && in_union(ui, uj) &&
              !out.contains(ui, uj)) {
            add(ui, uj);
            added = true;
          }
        }
      }
    }
  }

  auto final_and = [&](const AlignmentMatrix& a) {
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        if (!src_aligned[i] && !tgt_aligned[j] && a.contains(i, j)) add(i, j);
      }
    }
  };
  final_and(fwd);
  final_and(rev_t);
  return out;
}

std::vector<AlignmentMatrix> read_alignments(const std::filesystem::path& path,
                                             std::span<const ParallelPair> corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read alignments: " + path.string());
  std::vector<AlignmentMatrix> out;
  std::string line;
  while (std::getline(in, line)) {
    if (out.size() >= corpus.size()) {
      throw FormatError("alignment file has more lines than the corpus", out.size() + 1);
    }
    const auto& [s, t] = corpus[out.size()];
    try {
      out.push_back(AlignmentMatrix::parse(line, s.size(), t.size()));
    } catch (const FormatError& e) {
      throw FormatError(e.what(), out.size() + 1);
    }
  }
  if (out.size() != corpus.size()) {
    throw FormatError("alignment file has " + std::to_string(out.size()) + " lines, corpus has " +
                      std::to_string(corpus.size()));
  }
  return out;
}

void write_alignments(const std::filesystem::path& path,
                      std::span<const AlignmentMatrix> alignments) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write alignments: " + path.string());
  for (const auto& a : alignments) out << a.to_string() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace qrw
