#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrw/align.hpp"
#include "qrw/bundle.hpp"
#include "qrw/config.hpp"
#include "qrw/lm.hpp"
#include "qrw/mert.hpp"
#include "qrw/phrase_table.hpp"
#include "qrw/prefilter.hpp"
#include "qrw/simfilter.hpp"

namespace qrw {

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path work_dir;
  PrefilterConfig prefilter;
  SimFilterConfig simfilter;
  std::size_t dev_size = 500;     // production default: 100000
  double dev_fraction = 0.1;      // cap relative to the filtered corpus
  int align_iterations = 5;
  std::size_t max_phrase_len = 5;
  std::uint64_t prune_threshold = 3;
  double lm_discount = 0.75;
  MertOptions mert;
  DecodeParams decode;
  FeatureWeights initial_weights;
  std::uint64_t seed = 42;
  int threads = 1;
  bool resume = true;

  /// Keys (all optional): input, work_dir, every prefilter and simfilter
  /// key, dev_size, dev_fraction, align_iterations, max_phrase_len,
  /// prune_threshold, lm_discount, mert_max_iters, mert_nbest,
  /// mert_random_directions, mert_min_gain, decode parameters, weights.*,
  /// seed, threads, resume.
  static PipelineConfig from_config(const KeyValueConfig& kv);
  /// Every setting in key = value form; used for stage fingerprints.
  KeyValueConfig to_config() const;
};

struct PrepResult {
  std::vector<CleanPair> pairs;
  FilterReport prefilter_report;
  FilterReport simfilter_report;
  LoadStats load_stats;
};

/// Load, prefilter and similarity-filter a raw TSV. Writes
/// `prefilter.report` and `simfilter.report` to `out_dir`, plus
/// `corpus.src`/`corpus.tgt` unless a filter drops every record, in which
/// case StageError names that filter stage.
PrepResult run_prep(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                    const PrefilterConfig& prefilter, const SimFilterConfig& simfilter);

struct DevSplit {
  std::vector<std::size_t> train;  // ascending indices
  std::vector<std::size_t> dev;    // ascending indices
};

/// Seeded shuffle; dev holds min(dev_size, floor(n * dev_fraction)) pairs.
DevSplit split_dev(std::size_t n, std::size_t dev_size, double dev_fraction, std::uint64_t seed);

struct AlignResult {
  TranslationTable forward;   // t(target | source)
  TranslationTable backward;  // t(source | target)
  std::vector<AlignmentMatrix> alignments;  // symmetrized, source x target
};

AlignResult align_corpus(std::span<const ParallelPair> corpus, int iterations, int threads);

PhraseTable build_phrase_table(std::span<const ParallelPair> corpus,
                               std::span<const AlignmentMatrix> alignments,
                               const TranslationTable& forward,
                               const TranslationTable& backward, std::size_t max_len,
                               int threads);

lm::TrigramModel train_lm(std::span<const TokenSeq> sentences, double discount);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
  bool resumed = false;
};

struct TrainResult {
  std::filesystem::path bundle_dir;
  std::vector<StageTiming> timings;
  double tuned_bleu = 0.0;
};

/// prep -> split -> align -> phrases -> lm -> tune -> manifest, all under
/// `cfg.work_dir`. A stage whose fingerprint (settings plus input digests)
/// matches its stamp file is skipped. Failures surface as StageError with
/// earlier artifacts left in place.
TrainResult train_all(const PipelineConfig& cfg, std::ostream* log = nullptr);

}  // namespace qrw
