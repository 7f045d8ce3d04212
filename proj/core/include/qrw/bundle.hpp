#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "qrw/config.hpp"
#include "qrw/decoder.hpp"
#include "qrw/lm.hpp"
#include "qrw/phrase_table.hpp"

namespace qrw {

inline constexpr std::string_view kManifestName = "manifest.txt";

/// Phrase table, language model, weights and decode parameters. Immutable
/// after construction; concurrent decodes need no locking.
class ModelBundle {
 public:
  ModelBundle(PhraseTable table, lm::TrigramModel lm, FeatureWeights weights,
              DecodeParams params);

  /// Reads `manifest.txt` in `dir`; artifacts are resolved relative to it
  /// and their sha256 digests checked. Throws IoError or FormatError.
  static ModelBundle load(const std::filesystem::path& dir);

  const PhraseTable& table() const { return table_; }
  const lm::TrigramModel& lm() const { return lm_; }
  const PhraseIndex& index() const { return index_; }
  const FeatureWeights& weights() const { return weights_; }
  const DecodeParams& params() const { return params_; }
  const KeyValueConfig& manifest() const { return manifest_; }

  NBestList decode(std::span<const std::string> query, std::size_t n) const;
  NBestList decode(std::span<const std::string> query, std::size_t n,
                   const FeatureWeights& weights) const;

 private:
  PhraseTable table_;
  lm::TrigramModel lm_;
  PhraseIndex index_;
  FeatureWeights weights_;
  DecodeParams params_;
  KeyValueConfig manifest_;
};

}  // namespace qrw
