#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "qrw/align.hpp"
#include "qrw/error.hpp"
#include "temp_dir.hpp"

using namespace qrw;
using namespace qrw::testing;

namespace {

std::vector<ParallelPair> random_corpus(std::mt19937_64& rng, std::size_t n) {
  std::vector<ParallelPair> corpus;
  for (std::size_t k = 0; k < n; ++k) {
    ParallelPair p;
    for (std::size_t i = 0, I = 1 + rng() % 5; i < I; ++i) p.first.push_back("s" + std::to_string(rng() % 7));
    for (std::size_t j = 0, J = 1 + rng() % 5; j < J; ++j) p.second.push_back("t" + std::to_string(rng() % 7));
    corpus.push_back(std::move(p));
  }
  return corpus;
}

std::string dump(const TranslationTable& t) {
  std::ostringstream out;
  t.dump(out);
  return out.str();
}

AlignmentMatrix links(std::size_t I, std::size_t J,
                      std::initializer_list<std::pair<std::size_t, std::size_t>> l) {
  AlignmentMatrix a(I, J);
  for (auto [i, j] : l) a.add(i, j);
  return a;
}

}  // namespace

TEST(Model1, ToyCorpusConverges) {
  const std::vector<ParallelPair> toy = {{{"a", "b"}, {"x", "y"}}, {{"a"}, {"x"}}};
  const auto r = train_model1(toy, {.iterations = 10});
  EXPECT_GT(r.table.prob("a", "x"), 0.9);
  EXPECT_GT(r.table.prob("b", "y"), 0.9);
  EXPECT_EQ(r.log_likelihood.size(), 11u);
}

TEST(Model1, LogLikelihoodNeverDecreases) {
  std::mt19937_64 rng(1);
  for (int c = 0; c < 20; ++c) {
    const auto corpus = random_corpus(rng, 4 + rng() % 12);
    const auto r = train_model1(corpus, {.iterations = 12});
    for (std::size_t k = 1; k < r.log_likelihood.size(); ++k) {
      ASSERT_GE(r.log_likelihood[k], r.log_likelihood[k - 1] - 1e-9) << "corpus " << c;
    }
  }
}

TEST(Model1, RowsAreDistributions) {
  std::mt19937_64 rng(2);
  const auto corpus = random_corpus(rng, 30);
  const auto r = train_model1(corpus, {.iterations = 4});
  for (const auto& s : r.table.sources()) EXPECT_NEAR(r.table.row_sum(s), 1.0, 1e-9) << s;
  EXPECT_NEAR(r.table.row_sum(std::string(kNullToken)), 1.0, 1e-9);
}

TEST(Model1, IndependentOfCorpusOrder) {
  std::mt19937_64 rng(3);
  auto corpus = random_corpus(rng, 25);
  const auto a = train_model1(corpus, {.iterations = 5});
  std::reverse(corpus.begin(), corpus.end());
  const auto b = train_model1(corpus, {.iterations = 5});
  for (const auto& s : a.table.sources()) {
    for (int t = 0; t < 7; ++t) {
      const auto tt = "t" + std::to_string(t);
      EXPECT_NEAR(a.table.prob(s, tt), b.table.prob(s, tt), 1e-12);
    }
  }
}

TEST(Model1, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 rng(4);
  const auto corpus = random_corpus(rng, 40);
  const auto one = train_model1(corpus, {.iterations = 5, .threads = 1});
  const auto three = train_model1(corpus, {.iterations = 5, .threads = 3});
  for (const auto& s : one.table.sources()) {
    for (int t = 0; t < 7; ++t) {
      const auto tt = "t" + std::to_string(t);
      EXPECT_NEAR(one.table.prob(s, tt), three.table.prob(s, tt), 1e-12);
    }
  }
}

TEST(Model1, RejectsEmptyInput) {
  EXPECT_THROW(train_model1(std::vector<ParallelPair>{}), ContractError);
  const std::vector<ParallelPair> empty_side = {{{"a"}, {}}};
  EXPECT_THROW(train_model1(empty_side), ContractError);
}

TEST(TranslationTable, SaveLoadRoundTrip) {
  std::mt19937_64 rng(5);
  const auto r = train_model1(random_corpus(rng, 10), {.iterations = 3});
  TempDir tmp;
  r.table.save(tmp / "lex");
  EXPECT_EQ(dump(TranslationTable::load(tmp / "lex")), dump(r.table));
  write_file(tmp / "bad", "a\tb\t0.5\nbroken line\n");
  try {
    TranslationTable::load(tmp / "bad");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Viterbi, PicksMostProbableSourceAndLeavesNullUnlinked) {
  TranslationTable t;
  t.set("a", "x", 0.8);
  t.set("b", "x", 0.1);
  t.set("b", "y", 0.6);
  t.set(kNullToken, "z", 0.9);
  t.set("a", "z", 0.1);
  const TokenSeq src = {"a", "b"}, tgt = {"x", "y", "z"};
  const auto a = viterbi_align(t, src, tgt);
  EXPECT_EQ(a.to_string(), "0-0 1-1");
}

TEST(Viterbi, TiesGoToNullThenFirstSource) {
  TranslationTable t;
  t.set(kNullToken, "x", 0.5);
  t.set("a", "x", 0.5);
  t.set("a", "y", 0.4);
  t.set("b", "y", 0.4);
  const TokenSeq src = {"a", "b"}, tgt = {"x", "y"};
  EXPECT_EQ(viterbi_align(t, src, tgt).to_string(), "0-1");
}

TEST(AlignmentMatrix, ParseFormatAndBounds) {
  const auto a = AlignmentMatrix::parse("1-0 0-1  0-0", 2, 2);
  EXPECT_EQ(a.to_string(), "0-0 0-1 1-0");
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a.transposed().to_string(), "0-0 0-1 1-0");
  EXPECT_THROW(AlignmentMatrix::parse("2-0", 2, 2), FormatError);
  EXPECT_THROW(AlignmentMatrix::parse("x-0", 2, 2), FormatError);
  AlignmentMatrix m(1, 1);
  EXPECT_THROW(m.add(1, 0), ContractError);
}

TEST(Symmetrize, HandCases) {
  EXPECT_EQ(symmetrize(links(3, 3, {{0, 0}, {1, 1}, {1, 2}}),
                       links(3, 3, {{0, 0}, {1, 1}, {2, 2}}))
                .to_string(),
            "0-0 1-1 1-2 2-2");
  EXPECT_EQ(symmetrize(links(4, 4, {{0, 0}, {3, 3}}), links(4, 4, {{0, 0}})).to_string(),
            "0-0 3-3");
  EXPECT_EQ(symmetrize(links(4, 4, {{0, 0}, {0, 3}}), links(4, 4, {{0, 0}})).to_string(),
            "0-0");
  EXPECT_THROW(symmetrize(AlignmentMatrix(2, 3), AlignmentMatrix(2, 3)), ContractError);
}

TEST(Symmetrize, BetweenIntersectionAndUnion) {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 300; ++n) {
    const std::size_t I = 1 + rng() % 6, J = 1 + rng() % 6;
    AlignmentMatrix fwd(I, J), rev(J, I);
    for (std::size_t j = 0; j < J; ++j) {
      if (rng() % 4) fwd.add(rng() % I, j);
    }
    for (std::size_t i = 0; i < I; ++i) {
      if (rng() % 4) rev.add(rng() % J, i);
    }
    const auto s = symmetrize(fwd, rev);
    const auto r = rev.transposed();
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        if (fwd.contains(i, j) && r.contains(i, j)) {
          ASSERT_TRUE(s.contains(i, j));
        }
        if (s.contains(i, j)) {
          ASSERT_TRUE(fwd.contains(i, j) || r.contains(i, j));
        }
      }
    }
    if (fwd == r) {
      ASSERT_EQ(s, fwd);
    }
  }
}

TEST(AlignmentFiles, RoundTripAndValidation) {
  TempDir tmp;
  const std::vector<ParallelPair> corpus = {{{"a", "b"}, {"x"}}, {{"c"}, {"y", "z"}}};
  const std::vector<AlignmentMatrix> al = {links(2, 1, {{1, 0}}), links(1, 2, {{0, 0}, {0, 1}})};
  write_alignments(tmp / "al", al);
  EXPECT_EQ(read_file(tmp / "al"), "1-0\n0-0 0-1\n");
  EXPECT_EQ(read_alignments(tmp / "al", corpus), al);
  write_file(tmp / "short", "1-0\n");
  EXPECT_THROW(read_alignments(tmp / "short", corpus), FormatError);
}
