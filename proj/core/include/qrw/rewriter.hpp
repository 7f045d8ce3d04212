#pragma once

#include <array>
#include <chrono>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrw/bundle.hpp"
#include "qrw/text.hpp"

namespace qrw {

inline constexpr std::size_t kIdentitySkipDepth = 5;

/// Normalizes, turns punctuation into spaces and tokenizes a raw query the
/// same way training text is cleaned (minus URL and site stripping).
TokenSeq prepare_query(std::string_view query, const NormConfig& norm = {});

struct IdentitySkipChoice {
  std::size_t index = 0;  // 0-based position in the n-best list
  bool identical = false;
};

/// First surface differing from `input` among the first `depth` entries;
/// when all of them equal the input, the last one scanned. Comparison is
/// on normalized text. Throws ContractError on an empty list.
IdentitySkipChoice select_identity_skip(std::span<const std::string> surfaces,
                                        std::string_view input,
                                        std::size_t depth = kIdentitySkipDepth);

struct RewriteResult {
  std::string original;   // normalized, space-joined query
  std::string rewritten;
  std::size_t chosen_rank = 0;  // 1-based
  bool identical = false;
  std::size_t nbest_size = 0;
  std::chrono::nanoseconds latency{0};  // decode plus scan
  NBestList nbest;
};

/// Throws InputError when the query is empty after normalization.
RewriteResult rewrite(std::string_view query, const ModelBundle& bundle);

enum class ErrorType {
  kChangeIntention,
  kChangeNumbers,
  kDeleteWords,
  kChangeLocation,
  kAddRedundantWords,
  kNormalizationProblem,
  kGood,
};

const std::array<ErrorType, 7>& all_error_types();
std::string_view to_string(ErrorType t);
/// Throws InputError on an unknown label.
ErrorType parse_error_type(std::string_view label);

struct EvalRow {
  std::string query;
  std::string rewrite;
  std::size_t rank = 0;  // 0 when the query could not be rewritten
  ErrorType label = ErrorType::kGood;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::map<ErrorType, std::size_t> counts;

  /// `query<TAB>rewrite<TAB>rank<TAB>label` per row.
  std::string to_tsv() const;
  /// `label<TAB>count<TAB>percent` for every label, then `total<TAB>n`.
  std::string summary() const;
};

EvalReport evaluate_batch(std::span<const std::pair<std::string, ErrorType>> batch,
                          const ModelBundle& bundle);

/// Reads `query<TAB>label` lines; throws FormatError with the line number.
std::vector<std::pair<std::string, ErrorType>> load_labeled_queries(
    const std::filesystem::path& path);

}  // namespace qrw
