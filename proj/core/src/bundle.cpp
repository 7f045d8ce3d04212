#include "qrw/bundle.hpp"

#include "qrw/digest.hpp"
#include "qrw/error.hpp"

namespace qrw {

ModelBundle::ModelBundle(PhraseTable table, lm::TrigramModel lm, FeatureWeights weights,
                         DecodeParams params)
    : table_(std::move(table)),
      lm_(std::move(lm)),
      index_(table_, lm_),
      weights_(weights),
      params_(params) {
  weights_.validate();
  params_.validate();
}

ModelBundle ModelBundle::load(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestName;
  auto manifest = KeyValueConfig::load(manifest_path);

  auto artifact = [&](const std::string& name) {
    const auto file = manifest.get("artifact." + name);
    if (!file) throw FormatError(manifest_path.string() + ": missing artifact." + name);
    const auto path = dir / *file;
    if (const auto want = manifest.get("sha256." + name)) {
      const auto got = sha256_file(path);
      if (got != *want) {
        throw FormatError(path.string() + ": sha256 mismatch (manifest " + *want + ", file " +
                          got + ")");
      }
    }
    return path;
  };

  auto table = PhraseTable::load(artifact("phrase_table"));
  auto lm = lm::TrigramModel::load_binary(artifact("lm"));
  FeatureWeights weights;
  DecodeParams params;
  try {
    weights = FeatureWeights::from_config(manifest);
    params = DecodeParams::from_config(manifest);
  } catch (const InputError& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  ModelBundle bundle(std::move(table), std::move(lm), weights, params);
  bundle.manifest_ = std::move(manifest);
  return bundle;
}

NBestList ModelBundle::decode(std::span<const std::string> query, std::size_t n) const {
  return qrw::decode(index_, lm_, weights_, params_, query, n);
}

NBestList ModelBundle::decode(std::span<const std::string> query, std::size_t n,
                              const FeatureWeights& weights) const {
  return qrw::decode(index_, lm_, weights, params_, query, n);
}

}  // namespace qrw
