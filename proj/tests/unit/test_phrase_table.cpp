#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qrw/error.hpp"
#include "qrw/phrase_table.hpp"
#include "temp_dir.hpp"

using namespace qrw;
using namespace qrw::testing;

namespace {

AlignmentMatrix random_alignment(std::mt19937_64& rng, std::size_t I, std::size_t J) {
  AlignmentMatrix a(I, J);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      if (rng() % 4 == 0) a.add(i, j);
    }
  }
  return a;
}

TokenSeq words(const std::string& prefix, std::size_t n) {
  TokenSeq out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

PhraseTable small_table() {
  PhraseTable t;
  t.insert("a b", "x", {.count = 4, .phi_ts = 0.5, .lex_ts = 0.25, .phi_st = 1, .lex_st = 0.125});
  t.insert("a", "x", {.count = 2, .phi_ts = 0.123456789, .lex_ts = 1e-7, .phi_st = 0.3, .lex_st = 0.9});
  t.insert("c", "y z", {.count = 9, .phi_ts = 1, .lex_ts = 1, .phi_st = 1, .lex_st = 1});
  return t;
}

}  // namespace

TEST(ExtractSpans, MonotoneExample) {
  const auto a = AlignmentMatrix::parse("0-0 1-1", 2, 2);
  const std::vector<PhraseSpan> expected = {{0, 1, 0, 1}, {0, 2, 0, 2}, {1, 2, 1, 2}};
  EXPECT_EQ(extract_spans(a), expected);
}

TEST(ExtractSpans, UnalignedSourceWordExtendsSpans) {
  const auto a = AlignmentMatrix::parse("0-0 2-1", 3, 2);
  const TokenSeq src = {"a", "b", "c"}, tgt = {"x", "y"};
  const auto phrases = extract_phrases(src, tgt, a);
  auto has = [&](TokenSeq s, TokenSeq t) {
    return std::find(phrases.begin(), phrases.end(), PhrasePair{s, t}) != phrases.end();
  };
  EXPECT_TRUE(has({"a"}, {"x"}));
  EXPECT_TRUE(has({"a", "b"}, {"x"}));
  EXPECT_TRUE(has({"b", "c"}, {"y"}));
  EXPECT_TRUE(has({"a", "b", "c"}, {"x", "y"}));
  EXPECT_FALSE(has({"b"}, {"x"}));
}

TEST(ExtractSpans, CrossingLinkBlocksSpan) {
  const auto a = AlignmentMatrix::parse("0-1 1-0", 2, 2);
  const std::vector<PhraseSpan> expected = {{0, 1, 1, 2}, {0, 2, 0, 2}, {1, 2, 0, 1}};
  EXPECT_EQ(extract_spans(a), expected);
}

TEST(ExtractSpans, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 500; ++n) {
    const std::size_t I = 1 + rng() % 8, J = 1 + rng() % 8, max_len = 1 + rng() % 5;
    const auto a = random_alignment(rng, I, J);
    ASSERT_EQ(extract_spans(a, max_len), brute_force_spans(a, max_len)) << a.to_string();
  }
}

TEST(ExtractSpans, EmptyAlignmentYieldsNothing) {
  EXPECT_TRUE(extract_spans(AlignmentMatrix(3, 3)).empty());
}

TEST(CountPhrases, ThreadCountDoesNotChangeCounts) {
  std::mt19937_64 rng(12);
  std::vector<ParallelPair> corpus;
  std::vector<AlignmentMatrix> al;
  for (int k = 0; k < 60; ++k) {
    const std::size_t I = 1 + rng() % 6, J = 1 + rng() % 6;
    corpus.push_back({words("s", I), words("t", J)});
    al.push_back(random_alignment(rng, I, J));
  }
  const auto one = count_phrases(corpus, al, 4, 1);
  EXPECT_EQ(count_phrases(corpus, al, 4, 3), one);
  std::uint64_t total = 0;
  for (const auto& [k, c] : one) total += c;
  std::uint64_t expected = 0;
  for (const auto& a : al) expected += extract_spans(a, 4).size();
  EXPECT_EQ(total, expected);
}

TEST(CountPhrases, RejectsMismatchedInput) {
  const std::vector<ParallelPair> corpus = {{{"a"}, {"x"}}};
  EXPECT_THROW(count_phrases(corpus, std::vector<AlignmentMatrix>{}), ContractError);
}

TEST(LexicalWeight, MaxOverSourceAndNull) {
  TranslationTable t;
  t.set("a", "x", 0.4);
  t.set("b", "x", 0.7);
  t.set(kNullToken, "x", 0.1);
  t.set(kNullToken, "y", 0.2);
  const TokenSeq s = {"a", "b"}, tgt = {"x", "y"};
  EXPECT_DOUBLE_EQ(lexical_weight(s, tgt, t), 0.7 * 0.2);
}

TEST(ScorePhraseTable, RelativeFrequenciesNormalize) {
  PhraseCounts counts = {{{"a", "x"}, 3}, {{"a", "y"}, 1}, {{"b", "x"}, 2}, {{"a b", "x y"}, 5}};
  TranslationTable fwd, rev;
  fwd.set("a", "x", 0.5);
  rev.set("x", "a", 0.25);
  const auto t = score_phrase_table(counts, fwd, rev);
  ASSERT_EQ(t.size(), 4u);
  const auto* ax = t.find("a", "x");
  ASSERT_NE(ax, nullptr);
  EXPECT_EQ(ax->count, 3u);
  EXPECT_DOUBLE_EQ(ax->phi_ts, 0.75);
  EXPECT_DOUBLE_EQ(ax->phi_st, 0.6);
  EXPECT_DOUBLE_EQ(ax->lex_ts, 0.5);
  EXPECT_DOUBLE_EQ(ax->lex_st, 0.25);
  std::map<std::string, double> by_src, by_tgt;
  for (const auto& [k, s] : t.entries()) {
    by_src[k.first] += s.phi_ts;
    by_tgt[k.second] += s.phi_st;
  }
  for (const auto& [k, v] : by_src) EXPECT_NEAR(v, 1.0, 1e-12) << k;
  for (const auto& [k, v] : by_tgt) EXPECT_NEAR(v, 1.0, 1e-12) << k;
  EXPECT_THROW(score_phrase_table({}, fwd, rev), ContractError);
}

TEST(PhraseTableFile, WriteReadRoundTrip) {
  const auto t = small_table();
  std::ostringstream out;
  t.write(out);
  const auto text = out.str();
  EXPECT_NE(text.find("a b ||| x ||| 0.5 0.25 1 0.125 ||| 4\n"), std::string::npos);
  std::istringstream in(text);
  const auto back = PhraseTable::read(in);
  ASSERT_EQ(back.size(), t.size());
  EXPECT_EQ(back.find("a", "x")->phi_ts, 0.123456789);
  std::ostringstream again;
  back.write(again);
  EXPECT_EQ(again.str(), text);

  TempDir tmp;
  t.save(tmp / "pt");
  EXPECT_EQ(read_file(tmp / "pt"), text);
  EXPECT_EQ(PhraseTable::load(tmp / "pt").size(), 3u);
  EXPECT_THROW(PhraseTable::load(tmp / "missing"), IoError);
}

TEST(PhraseTableFile, MalformedLinesNameLineNumber) {
  const std::string good = "a ||| x ||| 1 1 1 1 ||| 5\n";
  for (const std::string bad : {"a ||| x ||| 1 1 1 ||| 5", "a ||| x ||| 1 1 1 1", " ||| x ||| 1 1 1 1 ||| 5",
                                "a ||| x ||| 1 1 q 1 ||| 5", "a ||| x ||| 1 1 1 1 ||| 0",
                                "a ||| x ||| 1 -1 1 1 ||| 5", "a ||| x ||| 1 1 1 1 ||| -5"}) {
    std::istringstream in(good + "\n" + bad + "\n");
    try {
      PhraseTable::read(in);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const FormatError& e) {
      EXPECT_EQ(e.line(), 3u) << bad;
    }
  }
}

TEST(PhraseTableFile, DelimiterInsideTokenIsRejected) {
  PhraseTable t;
  t.insert("a|||b", "x", {.count = 1, .phi_ts = 1, .lex_ts = 1, .phi_st = 1, .lex_st = 1});
  std::ostringstream out;
  EXPECT_THROW(t.write(out), InputError);
}

TEST(Prune, DropsLowCountsAndIsIdempotent) {
  const auto t = small_table();
  const auto once = prune(t, 3);
  EXPECT_EQ(once.removed, 1u);
  EXPECT_EQ(once.retained, 2u);
  EXPECT_EQ(once.table.find("a", "x"), nullptr);
  EXPECT_EQ(*once.table.find("a b", "x"), *t.find("a b", "x"));
  const auto twice = prune(once.table, 3);
  EXPECT_EQ(twice.removed, 0u);
  EXPECT_EQ(twice.table, once.table);
  EXPECT_EQ(prune(t, 0).table, t);
}
