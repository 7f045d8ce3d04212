#include "qrw/phrase_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "qrw/error.hpp"

namespace qrw {

namespace {

constexpr std::string_view kDelim = " ||| ";

std::string join_span(std::span<const std::string> tokens, std::size_t b, std::size_t e) {
  return join_tokens(tokens.subspan(b, e - b));
}

}  // namespace

std::vector<PhraseSpan> extract_spans(const AlignmentMatrix& a, std::size_t max_len) {
  const std::size_t I = a.source_length();
  const std::size_t J = a.target_length();
  std::vector<PhraseSpan> out;
  if (max_len == 0 || a.empty()) return out;

  std::vector<bool> src_aligned(I, false);
  for (const auto& [i, j] : a.links()) src_aligned[i] = true;

  for (std::size_t t_b = 0; t_b < J; ++t_b) {
    for (std::size_t t_e = t_b; t_e < std::min(J, t_b + max_len); ++t_e) {
      // Source extent of the links leaving the target span.
      std::size_t s_min = I, s_max = 0;
      bool any = false;
      for (std::size_t j = t_b; j <= t_e; ++j) {
        for (std::size_t i = 0; i < I; ++i) {
          if (a.contains(i, j)) {
            s_min = std::min(s_min, i);
            s_max = std::max(s_max, i);
            any = true;
          }
        }
      }
      if (!any || s_max - s_min + 1 > max_len) continue;

      bool consistent = true;
      for (std::size_t i = s_min; i <= s_max && consistent; ++i) {
        for (std::size_t j = 0; j < J; ++j) {
          if (a.contains(i, j) && (j < t_b || j > t_e)) {
            consistent = false;
            break;
          }
        }
      }
      if (!consistent) continue;

      for (std::size_t s_b = s_min;; --s_b) {
        for (std::size_t s_e = s_max; s_e < I && s_e - s_b + 1 <= max_len; ++s_e) {
          if (s_e > s_max && src_aligned[s_e]) break;
          out.push_back({static_cast<std::uint32_t>(s_b), static_cast<std::uint32_t>(s_e + 1),
                         static_cast<std::uint32_t>(t_b), static_cast<std::uint32_t>(t_e + 1)});
        }
        if (s_b == 0 || src_aligned[s_b - 1] || s_max - (s_b - 1) + 1 > max_len) break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PhrasePair> extract_phrases(std::span<const std::string> source,
                                        std::span<const std::string> target,
                                        const AlignmentMatrix& alignment, std::size_t max_len) {
  if (alignment.source_length() != source.size() || alignment.target_length() != target.size()) {
    throw ContractError("alignment dimensions do not match the sentence pair");
  }
  std::vector<PhrasePair> out;
  for (const auto& sp : extract_spans(alignment, max_len)) {
    out.push_back({TokenSeq(source.begin() + sp.src_begin, source.begin() + sp.src_end),
                   TokenSeq(target.begin() + sp.tgt_begin, target.begin() + sp.tgt_end)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

PhraseCounts count_phrases(std::span<const ParallelPair> corpus,
                           std::span<const AlignmentMatrix> alignments, std::size_t max_len,
                           int threads) {
  if (corpus.size() != alignments.size()) {
    throw ContractError("corpus and alignment counts differ");
  }
  const std::size_t n_chunks = std::max<std::size_t>(
      1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), corpus.size()));
  std::vector<PhraseCounts> parts(n_chunks);
  const std::size_t per = (corpus.size() + n_chunks - 1) / n_chunks;
  auto run = [&](std::size_t c) {
    const std::size_t b = std::min(corpus.size(), c * per);
    const std::size_t e = std::min(corpus.size(), b + per);
    for (std::size_t k = b; k < e; ++k) {
      const auto& [src, tgt] = corpus[k];
      if (alignments[k].source_length() != src.size() ||
          alignments[k].target_length() != tgt.size()) {
        throw ContractError("alignment " + std::to_string(k) + " does not match its pair");
      }
      for (const auto& sp : extract_spans(alignments[k], max_len)) {
        ++parts[c][{join_span(src, sp.src_begin, sp.src_end),
                    join_span(tgt, sp.tgt_begin, sp.tgt_end)}];
      }
    }
  };
  if (n_chunks == 1) {
    run(0);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(n_chunks);
    for (std::size_t c = 0; c < n_chunks; ++c) {
      workers.emplace_back([&, c] {
        try {
          run(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  PhraseCounts total = std::move(parts[0]);
  for (std::size_t c = 1; c < n_chunks; ++c) {
    for (const auto& [k, v] : parts[c]) total[k] += v;
  }
  return total;
}

double lexical_weight(std::span<const std::string> source, std::span<const std::string> target,
                      const TranslationTable& table) {
  double w = 1.0;
  for (const auto& t : target) {
    double best = table.prob(kNullToken, t);
    for (const auto& s : source) best = std::max(best, table.prob(s, t));
    w *= best;
  }
  return w;
}

PhraseTable score_phrase_table(const PhraseCounts& counts, const TranslationTable& lex_fwd,
                               const TranslationTable& lex_rev) {
  if (counts.empty()) throw ContractError("cannot score an empty phrase multiset");
  std::unordered_map<std::string, std::uint64_t> src_total, tgt_total;
  for (const auto& [k, c] : counts) {
    src_total[k.first] += c;
    tgt_total[k.second] += c;
  }
  PhraseTable table;
  for (const auto& [k, c] : counts) {
    const auto s = tokenize(k.first);
    const auto t = tokenize(k.second);
    PhraseScores sc;
    sc.count = c;
    sc.phi_ts = static_cast<double>(c) / static_cast<double>(src_total[k.first]);
    sc.phi_st = static_cast<double>(c) / static_cast<double>(tgt_total[k.second]);
    sc.lex_ts = lexical_weight(s, t, lex_fwd);
    sc.lex_st = lexical_weight(t, s, lex_rev);
    table.insert(k.first, k.second, sc);
  }
  return table;
}

PruneResult prune(const PhraseTable& table, std::uint64_t max_dropped_count) {
  PruneResult r;
  for (const auto& [k, sc] : table.entries()) {
    if (sc.count <= max_dropped_count) {
      ++r.removed;
    } else {
      r.table.insert(k.first, k.second, sc);
      ++r.retained;
    }
  }
  return r;
}

// ------------------------------------------------------------- PhraseTable

void PhraseTable::insert(std::string source, std::string target, const PhraseScores& scores) {
  entries_[{std::move(source), std::move(target)}] = scores;
}

const PhraseScores* PhraseTable::find(const std::string& source, const std::string& target) const {
  auto it = entries_.find({source, target});
  return it == entries_.end() ? nullptr : &it->second;
}

void PhraseTable::write(std::ostream& out) const {
  char buf[128];
  for (const auto& [k, sc] : entries_) {
    for (const auto* side : {&k.first, &k.second}) {
      if (side->find("|||") != std::string::npos) {
        throw InputError("phrase contains the reserved delimiter '|||': " + *side);
      }
      if (side->empty()) throw InputError("phrase table entry with an empty side");
    }
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g", sc.phi_ts, sc.lex_ts, sc.phi_st,
                  sc.lex_st);
    out << k.first << kDelim << k.second << kDelim << buf << kDelim << sc.count << '\n';
  }
}

void PhraseTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write phrase table: " + path.string());
  write(out);
  if (!out) throw IoError("write failed: " + path.string());
}

PhraseTable PhraseTable::read(std::istream& in) {
  PhraseTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const auto d = line.find(kDelim, pos);
      if (d == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, d - pos));
      pos = d + kDelim.size();
    }
    if (fields.size() != 4) {
      throw FormatError("expected 4 fields separated by ' ||| ', found " +
                            std::to_string(fields.size()),
                        line_no);
    }
    if (tokenize(fields[0]).empty() || tokenize(fields[1]).empty()) {
      throw FormatError("empty phrase", line_no);
    }
    const auto nums = tokenize(fields[2]);
    if (nums.size() != 4) throw FormatError("expected 4 scores", line_no);
    PhraseScores sc;
    double* dst[4] = {&sc.phi_ts, &sc.lex_ts, &sc.phi_st, &sc.lex_st};
    try {
      for (int k = 0; k < 4; ++k) {
        std::size_t used = 0;
        *dst[k] = std::stod(nums[k], &used);
        if (used != nums[k].size() || !std::isfinite(*dst[k]) || *dst[k] < 0.0) {
          throw std::invalid_argument(nums[k]);
        }
      }
      std::size_t used = 0;
      const auto& cnt = fields[3];
      if (cnt.empty() || cnt.front() == '-') throw std::invalid_argument(cnt);
      sc.count = std::stoull(cnt, &used);
      if (used != cnt.size() || sc.count == 0) throw std::invalid_argument(cnt);
    } catch (const std::logic_error&) {
      throw FormatError("bad score or count", line_no);
    }
    table.insert(fields[0], fields[1], sc);
  }
  return table;
}

PhraseTable PhraseTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read phrase table: " + path.string());
  return read(in);
}

}  // namespace qrw
