#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qrw {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool is_zero() const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Stable identifier; part of the cache key.
  virtual std::string id() const = 0;
  /// One vector per text, in input order. Throws ProviderError.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Deterministic hermetic embedder: character 3-grams of the space-padded
/// text hashed (FNV-1a 64) into `dim` buckets, then L2-normalized. The empty
/// string has no grams and maps to the zero vector.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 256);

  std::string id() const override;
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  EmbeddingVector embed_one(const std::string& text) const;

 private:
  std::size_t dim_;
};

struct RemoteEmbedderOptions {
  std::string base_url = "http://127.0.0.1:8080";
  std::chrono::milliseconds timeout{5000};
  int retries = 2;
  std::size_t max_batch = 256;
};

struct RemoteHealth {
  std::string status;
  std::size_t dim = 0;
  std::string model;
};

/// Client for the `/embed` + `/health` sidecar protocol.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderOptions options);

  std::string id() const override;
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  RemoteHealth health() const;

 private:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;

  RemoteEmbedderOptions options_;
};

/// Memoizes another provider by (provider id, text). Safe for concurrent
/// readers and writers; duplicate inserts are benign since values are
/// deterministic per key.
class CachingEmbedder final : public EmbeddingProvider {
 public:
  explicit CachingEmbedder(EmbeddingProvider& inner) : inner_(inner) {}

  std::string id() const override { return inner_.id(); }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

  std::size_t size() const;
  std::size_t misses() const { return misses_; }

 private:
  EmbeddingProvider& inner_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
  std::size_t misses_ = 0;
};

/// dot(q,t) / (|q| |t|) clamped to [-1, 1]. Throws ContractError on a
/// dimension mismatch; a zero vector yields 0 and bumps `zero_vectors`.
double cosine_similarity(const EmbeddingVector& q, const EmbeddingVector& t,
                         std::size_t* zero_vectors = nullptr);

}  // namespace qrw
