#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qrw/phrase_table.hpp"
#include "qrw/text.hpp"

namespace qrw::testing {

/// Pseudo-Arabic words over letters that normalization leaves untouched.
std::vector<std::string> make_words(std::size_t n, std::size_t min_len, std::size_t max_len,
                                    std::uint64_t seed);

struct SynonymCorpusOptions {
  std::size_t pairs = 5000;
  std::size_t held_out = 100;
  std::size_t base_words = 160;
  std::size_t synonym_pairs = 40;
  double low_rank_share = 0.1;  // rows with rank 6..10
  std::uint64_t seed = 7;
};

/// Query-title pairs where titles replace each query word from a fixed
/// synonym domain with its counterpart; held-out queries never occur in the
/// training rows.
struct SynonymCorpus {
  std::vector<QueryTitleRecord> records;
  std::map<std::string, std::string> synonyms;
  std::vector<std::string> base_words;
  std::vector<TokenSeq> held_out;

  std::string to_tsv() const;
  /// The rewrite differs from the query and replaced at least one
  /// synonym-domain word by its counterpart.
  bool applies_synonym(const TokenSeq& query, const TokenSeq& rewrite) const;
};

SynonymCorpus make_synonym_corpus(const SynonymCorpusOptions& opts = {});

/// Sentences of 3..12 words drawn from a Zipf-like distribution.
std::vector<TokenSeq> make_random_sentences(std::size_t n, std::size_t vocab,
                                            std::uint64_t seed);

struct LargeTable {
  PhraseTable table;
  std::vector<TokenSeq> lm_corpus;
  std::vector<TokenSeq> queries;
};

/// A phrase table with exactly `entries` rows (1..3 word sources, several
/// targets each, counts above the pruning threshold), an LM corpus over the
/// same vocabulary and queries covered by the table.
LargeTable make_large_table(std::size_t entries, std::size_t queries, std::uint64_t seed);

}  // namespace qrw::testing
