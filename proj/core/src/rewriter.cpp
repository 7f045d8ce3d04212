#include "qrw/rewriter.hpp"

#include <cstdio>
#include <fstream>

#include "qrw/error.hpp"

namespace qrw {

TokenSeq prepare_query(std::string_view query, const NormConfig& norm) {
  auto cps = unicode::decode(normalize_text(query, norm));
  for (auto& c : cps) {
    if (unicode::is_punct(c)) c = U' ';
  }
  return tokenize(normalize_text(unicode::encode(cps), norm));
}

IdentitySkipChoice select_identity_skip(std::span<const std::string> surfaces,
                                        std::string_view input, std::size_t depth) {
  if (surfaces.empty()) throw ContractError("identity skip over an empty n-best list");
  if (depth == 0) throw ContractError("identity skip depth must be >= 1");
  const std::string in = normalize_text(input);
  const std::size_t scan = std::min(depth, surfaces.size());
  for (std::size_t k = 0; k < scan; ++k) {
    if (normalize_text(surfaces[k]) != in) return {k, false};
  }
  return {scan - 1, true};
}

RewriteResult rewrite(std::string_view query, const ModelBundle& bundle) {
  const auto tokens = prepare_query(query);
  if (tokens.empty()) throw InputError("query is empty after normalization");
  RewriteResult r;
  r.original = join_tokens(tokens);

  const auto start = std::chrono::steady_clock::now();
  r.nbest = bundle.decode(tokens, std::max(bundle.params().nbest_size, kIdentitySkipDepth));
  std::vector<std::string> surfaces;
  surfaces.reserve(r.nbest.size());
  for (const auto& h : r.nbest) surfaces.push_back(h.surface);
  const auto choice = select_identity_skip(surfaces, r.original);
  r.latency = std::chrono::steady_clock::now() - start;

  r.rewritten = surfaces[choice.index];
  r.chosen_rank = choice.index + 1;
  r.identical = choice.identical;
  r.nbest_size = r.nbest.size();
  return r;
}

// ------------------------------------------------------------- evaluation

const std::array<ErrorType, 7>& all_error_types() {
  static constexpr std::array<ErrorType, 7> kAll = {
      ErrorType::kChangeIntention,    ErrorType::kChangeNumbers,
      ErrorType::kDeleteWords,        ErrorType::kChangeLocation,
      ErrorType::kAddRedundantWords,  ErrorType::kNormalizationProblem,
      ErrorType::kGood};
  return kAll;
}

std::string_view to_string(ErrorType t) {
  switch (t) {
    case ErrorType::kChangeIntention: return "change-intention";
    case ErrorType::kChangeNumbers: return "change-numbers";
    case ErrorType::kDeleteWords: return "delete-words";
    case ErrorType::kChangeLocation: return "change-location";
    case ErrorType::kAddRedundantWords: return "add-redundant-words";
    case ErrorType::kNormalizationProblem: return "normalization-problem";
    case ErrorType::kGood: return "good";
  }
  return "good";
}

ErrorType parse_error_type(std::string_view label) {
  for (auto t : all_error_types()) {
    if (to_string(t) == label) return t;
  }
  throw InputError("unknown evaluation label '" + std::string(label) + "'");
}

std::string EvalReport::to_tsv() const {
  std::string out;
  for (const auto& r : rows) {
    out += r.query + '\t' + r.rewrite + '\t' + std::to_string(r.rank) + '\t' +
           std::string(to_string(r.label)) + '\n';
  }
  return out;
}

std::string EvalReport::summary() const {
  std::string out;
  char pct[32];
  for (auto t : all_error_types()) {
    auto it = counts.find(t);
    const std::size_t n = it == counts.end() ? 0 : it->second;
    std::snprintf(pct, sizeof pct, "%.2f",
                  rows.empty() ? 0.0 : 100.0 * static_cast<double>(n) / rows.size());
    out += std::string(to_string(t)) + '\t' + std::to_string(n) + '\t' + pct + '\n';
  }
  out += "total\t" + std::to_string(rows.size()) + '\n';
  return out;
}

EvalReport evaluate_batch(std::span<const std::pair<std::string, ErrorType>> batch,
                          const ModelBundle& bundle) {
  EvalReport report;
  for (const auto& [query, label] : batch) {
    EvalRow row;
    row.query = query;
    row.label = label;
    try {
      const auto r = rewrite(query, bundle);
      row.rewrite = r.rewritten;
      row.rank = r.chosen_rank;
    } catch (const InputError&) {
    }
    report.rows.push_back(std::move(row));
    ++report.counts[label];
  }
  return report;
}

std::vector<std::pair<std::string, ErrorType>> load_labeled_queries(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read labeled queries: " + path.string());
  std::vector<std::pair<std::string, ErrorType>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw FormatError("expected query<TAB>label", line_no);
    try {
      out.emplace_back(line.substr(0, tab), parse_error_type(line.substr(tab + 1)));
    } catch (const InputError& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace qrw
