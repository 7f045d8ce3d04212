#include <benchmark/benchmark.h>

#include <random>

#include "qrw/align.hpp"
#include "qrw/bundle.hpp"
#include "qrw/lm.hpp"
#include "qrw/mert.hpp"
#include "qrw/phrase_table.hpp"
#include "qrw/prefilter.hpp"
#include "qrw/rewriter.hpp"
#include "synthetic.hpp"

namespace {

using namespace qrw;
using namespace qrw::testing;

const LargeTable& large() {
  static const LargeTable t = make_large_table(100000, 200, 61);
  return t;
}

const ModelBundle& large_bundle() {
  static const ModelBundle b(prune(large().table, 3).table,
                             lm::TrigramModel::estimate(lm::count_ngrams(large().lm_corpus)),
                             FeatureWeights{}, DecodeParams{});
  return b;
}

void BM_Rewrite(benchmark::State& state) {
  const auto& bundle = large_bundle();
  const auto& queries = large().queries;
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rewrite(join_tokens(queries[k++ % queries.size()]), bundle));
  }
}
BENCHMARK(BM_Rewrite)->Unit(benchmark::kMillisecond);

void BM_DecodeBeam(benchmark::State& state) {
  const auto& bundle = large_bundle();
  DecodeParams p;
  p.beam_size = static_cast<std::size_t>(state.range(0));
  const ModelBundle b(bundle.table(), bundle.lm(), FeatureWeights{}, p);
  const auto& queries = large().queries;
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b.decode(queries[k++ % queries.size()], 5));
  }
}
BENCHMARK(BM_DecodeBeam)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LmEstimate(benchmark::State& state) {
  const auto corpus = make_random_sentences(static_cast<std::size_t>(state.range(0)), 4000, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lm::TrigramModel::estimate(lm::count_ngrams(corpus)));
  }
}
BENCHMARK(BM_LmEstimate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_LmLoadBinary(benchmark::State& state) {
  const auto corpus = make_random_sentences(static_cast<std::size_t>(state.range(0)), 4000, 3);
  const auto bytes = lm::TrigramModel::estimate(lm::count_ngrams(corpus)).to_binary();
  for (auto _ : state) benchmark::DoNotOptimize(lm::TrigramModel::from_binary(bytes));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_LmLoadBinary)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Model1Iteration(benchmark::State& state) {
  const auto corpus = make_synonym_corpus({.pairs = static_cast<std::size_t>(state.range(0))});
  std::vector<ParallelPair> pairs;
  for (const auto& r : corpus.records) pairs.push_back({tokenize(r.query), tokenize(r.title)});
  for (auto _ : state) benchmark::DoNotOptimize(train_model1(pairs, {.iterations = 1}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pairs.size()));
}
BENCHMARK(BM_Model1Iteration)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_PhraseExtraction(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<AlignmentMatrix> al;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t I = 3 + rng() % 6, J = 3 + rng() % 10;
    AlignmentMatrix a(I, J);
    for (std::size_t j = 0; j < J; ++j) a.add(std::min<std::size_t>(I - 1, j * I / J), j);
    al.push_back(std::move(a));
  }
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& a : al) n += extract_spans(a, 5).size();
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * al.size()));
}
BENCHMARK(BM_PhraseExtraction)->Unit(benchmark::kMillisecond);

void BM_Prefilter(benchmark::State& state) {
  const auto corpus = make_synonym_corpus({.pairs = 5000});
  for (auto _ : state) benchmark::DoNotOptimize(run_prefilter(corpus.records, {}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corpus.records.size()));
}
BENCHMARK(BM_Prefilter)->Unit(benchmark::kMillisecond);

void BM_LineSearch(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
  std::vector<SentencePool> pools;
  for (int s = 0; s < 500; ++s) {
    TokenSeq ref;
    for (int k = 0; k < 5; ++k) ref.push_back(vocab[rng() % vocab.size()]);
    pools.emplace_back(ref);
    for (int h = 0; h < 100; ++h) {
      TokenSeq c;
      for (std::size_t k = 0, len = 2 + rng() % 5; k < len; ++k) c.push_back(vocab[rng() % vocab.size()]);
      FeatureVector f;
      for (auto& x : f) x = unit(rng);
      pools.back().add(join_tokens(c), f);
    }
  }
  FeatureVector d{};
  d[kLm] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(line_search(pools, FeatureWeights{}, d));
}
BENCHMARK(BM_LineSearch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
