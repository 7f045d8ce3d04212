#include <gtest/gtest.h>

#include <algorithm>
#include <bit>

#include "qrw/error.hpp"
#include "qrw/rewriter.hpp"
#include "temp_dir.hpp"

using namespace qrw;
using namespace qrw::testing;

namespace {

PhraseScores scores(double p) { return {.count = 5, .phi_ts = p, .lex_ts = p, .phi_st = p, .lex_st = p}; }

// "الذهب" maps to itself with the highest score, so the identity rewrite
// ranks first and the skip has to move past it.
ModelBundle small_bundle() {
  PhraseTable t;
  t.insert("سعر", "سعر", scores(0.9));
  t.insert("الذهب", "الذهب", scores(0.8));
  t.insert("الذهب", "المعدن", scores(0.3));
  t.insert("الذهب", "الدهب", scores(0.1));
  const std::vector<TokenSeq> corpus = {{"سعر", "الذهب"}, {"سعر", "المعدن"}, {"سعر", "الذهب", "اليوم"}};
  auto lm = lm::TrigramModel::estimate(lm::count_ngrams(corpus));
  DecodeParams p;
  p.distortion_limit = 0;
  return ModelBundle(std::move(t), std::move(lm), FeatureWeights{}, p);
}

}  // namespace

TEST(IdentitySkip, AllThirtyTwoPatterns) {
  const std::string input = "سعر الذهب اليوم";
  for (unsigned mask = 0; mask < 32; ++mask) {
    std::vector<std::string> surfaces;
    for (unsigned k = 0; k < 5; ++k) {
      surfaces.push_back(mask & (1u << k) ? input : "بديل " + std::to_string(k));
    }
    const std::size_t expect = mask == 31 ? 4 : std::countr_one(mask);
    const auto c = select_identity_skip(surfaces, input);
    EXPECT_EQ(c.index, expect) << mask;
    EXPECT_EQ(c.identical, mask == 31) << mask;
  }
}

TEST(IdentitySkip, ComparesNormalizedTextAndRespectsDepth) {
  const std::vector<std::string> s = {"سعر الذهب", "أسعار", "c"};
  EXPECT_EQ(select_identity_skip(s, "  سعر   الذهب ").index, 1u);
  const std::vector<std::string> short_list = {"a", "a"};
  const auto c = select_identity_skip(short_list, "a");
  EXPECT_EQ(c.index, 1u);
  EXPECT_TRUE(c.identical);
  const std::vector<std::string> deep = {"a", "a", "b"};
  EXPECT_EQ(select_identity_skip(deep, "a", 2).index, 1u);
  EXPECT_THROW(select_identity_skip(std::vector<std::string>{}, "a"), ContractError);
  EXPECT_THROW(select_identity_skip(deep, "a", 0), ContractError);
}

TEST(PrepareQuery, CleansLikeTrainingText) {
  EXPECT_EQ(prepare_query("  سعر، الذهب!! اليوم "), (TokenSeq{"سعر", "الذهب", "اليوم"}));
  EXPECT_EQ(prepare_query("أسعار"), prepare_query("اسعار"));
  EXPECT_TRUE(prepare_query("!!! ...").empty());
}

TEST(Rewrite, SkipsIdentityHypothesis) {
  const auto bundle = small_bundle();
  const auto r = rewrite("سعر الذهب؟", bundle);
  EXPECT_EQ(r.original, "سعر الذهب");
  ASSERT_GE(r.nbest_size, 2u);
  EXPECT_EQ(r.nbest[0].surface, "سعر الذهب");
  EXPECT_EQ(r.chosen_rank, 2u);
  EXPECT_EQ(r.rewritten, r.nbest[1].surface);
  EXPECT_FALSE(r.identical);
  EXPECT_GT(r.latency.count(), 0);
}

TEST(Rewrite, UnknownQueryFallsBackToIdentity) {
  const auto bundle = small_bundle();
  const auto r = rewrite("كلمة", bundle);
  EXPECT_EQ(r.rewritten, r.original);
  EXPECT_EQ(r.original, normalize_text("كلمة"));
  EXPECT_TRUE(r.identical);
  EXPECT_EQ(r.chosen_rank, 1u);
}

TEST(Rewrite, EmptyQueryIsInputError) {
  const auto bundle = small_bundle();
  EXPECT_THROW(rewrite("", bundle), InputError);
  EXPECT_THROW(rewrite(" ؟! ", bundle), InputError);
}

TEST(ErrorTypes, RoundTripLabels) {
  EXPECT_EQ(all_error_types().size(), 7u);
  for (auto t : all_error_types()) EXPECT_EQ(parse_error_type(to_string(t)), t);
  EXPECT_EQ(to_string(ErrorType::kAddRedundantWords), "add-redundant-words");
  EXPECT_THROW(parse_error_type("Good"), InputError);
}

TEST(Evaluation, BatchReportAndSummary) {
  const auto bundle = small_bundle();
  const auto batch = load_labeled_queries(data_dir() / "eval_queries.tsv");
  ASSERT_EQ(batch.size(), 4u);
  EXPECT_EQ(batch[3].second, ErrorType::kDeleteWords);
  const auto report = evaluate_batch(batch, bundle);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_EQ(report.rows[0].rewrite, rewrite(batch[0].first, bundle).rewritten);
  EXPECT_EQ(report.rows[3].rank, 0u);
  EXPECT_EQ(report.rows[3].rewrite, "");
  const auto tsv = report.to_tsv();
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 4);
  EXPECT_NE(tsv.find("!!!\t\t0\tdelete-words\n"), std::string::npos);
  EXPECT_EQ(report.summary(),
            "change-intention\t0\t0.00\n"
            "change-numbers\t1\t25.00\n"
            "delete-words\t1\t25.00\n"
            "change-location\t1\t25.00\n"
            "add-redundant-words\t0\t0.00\n"
            "normalization-problem\t0\t0.00\n"
            "good\t1\t25.00\n"
            "total\t4\n");
}

TEST(Evaluation, LabeledQueryErrors) {
  TempDir tmp;
  write_file(tmp / "bad", "a\tgood\nno tab here\n");
  try {
    load_labeled_queries(tmp / "bad");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  write_file(tmp / "label", "a\tgood\nb\tawful\n");
  EXPECT_THROW(load_labeled_queries(tmp / "label"), FormatError);
  EXPECT_THROW(load_labeled_queries(tmp / "missing"), IoError);
}
