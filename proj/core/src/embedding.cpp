#include "qrw/embedding.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "qrw/error.hpp"
#include "qrw/text.hpp"

namespace qrw {
namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

bool EmbeddingVector::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double cosine_similarity(const EmbeddingVector& q, const EmbeddingVector& t,
                         std::size_t* zero_vectors) {
  if (q.dim() != t.dim()) {
    throw ContractError("embedding dimension mismatch: " + std::to_string(q.dim()) + " vs " +
                        std::to_string(t.dim()));
  }
  double dot = 0.0, qq = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    dot += q.values[i] * t.values[i];
    qq += q.values[i] * q.values[i];
    tt += t.values[i] * t.values[i];
  }
  if (qq == 0.0 || tt == 0.0) {
    if (zero_vectors) ++*zero_vectors;
    return 0.0;
  }
  return std::clamp(dot / (std::sqrt(qq) * std::sqrt(tt)), -1.0, 1.0);
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ContractError("embedding dimension must be positive");
}

std::string HashingEmbedder::id() const { return "fallback-char3-" + std::to_string(dim_); }

EmbeddingVector HashingEmbedder::embed_one(const std::string& text) const {
  EmbeddingVector v;
  v.values.assign(dim_, 0.0);
  if (text.empty()) return v;
  std::u32string padded = U" " + unicode::decode(text) + U" ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::string gram = unicode::encode(std::u32string_view(padded).substr(i, 3));
    v.values[fnv1a64(gram) % dim_] += 1.0;
  }
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v.values) x /= norm;
  return v;
}

std::vector<EmbeddingVector> HashingEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options) : options_(std::move(options)) {
  if (options_.max_batch == 0) throw ContractError("max_batch must be positive");
}

std::string RemoteEmbedder::id() const { return "remote:" + options_.base_url; }

namespace {

httplib::Client make_client(const RemoteEmbedderOptions& o) {
  httplib::Client cli(o.base_url);
  const auto ms = o.timeout.count();
  cli.set_connection_timeout(ms / 1000, static_cast<long>((ms % 1000) * 1000));
  cli.set_read_timeout(ms / 1000, static_cast<long>((ms % 1000) * 1000));
  cli.set_write_timeout(ms / 1000, static_cast<long>((ms % 1000) * 1000));
  return cli;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

RemoteHealth RemoteEmbedder::health() const {
  auto cli = make_client(options_);
  auto res = cli.Get("/health");
  if (!res) throw ProviderError("health check failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ProviderError("health check returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto body = json::parse(res->body);
    RemoteHealth h;
    h.status = body.at("status").get<std::string>();
    h.dim = body.at("dim").get<std::size_t>();
    h.model = body.value("model", std::string{});
    return h;
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed /health response: ") + e.what());
  }
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  const json request = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string payload = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    auto cli = make_client(options_);
    auto res = cli.Post("/embed", payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw ProviderError("embedding request rejected: " + last_error);
    }
    try {
      const auto body = json::parse(res->body);
      const auto dim = body.at("dim").get<std::size_t>();
      const auto& vectors = body.at("vectors");
      if (!vectors.is_array() || vectors.size() != texts.size()) {
        throw ProviderError("embedding response has " + std::to_string(vectors.size()) +
                            " vectors for " + std::to_string(texts.size()) + " texts");
      }
      std::vector<EmbeddingVector> out;
      out.reserve(texts.size());
      for (const auto& v : vectors) {
        EmbeddingVector ev;
        ev.values = v.get<std::vector<double>>();
        if (ev.dim() != dim) throw ProviderError("vector length differs from reported dim");
        for (double x : ev.values) {
          if (!std::isfinite(x)) throw ProviderError("non-finite embedding value");
        }
        out.push_back(std::move(ev));
      }
      return out;
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed /embed response: ") + e.what());
    }
  }
  throw ProviderError("embedding provider unreachable after " +
                      std::to_string(options_.retries + 1) + " attempts: " + last_error);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += options_.max_batch) {
    const auto n = std::min(options_.max_batch, texts.size() - i);
    auto part = embed_batch(texts.subspan(i, n));
    for (auto& v : part) out.push_back(std::move(v));
  }
  if (!out.empty()) {
    const auto dim = out.front().dim();
    for (const auto& v : out) {
      if (v.dim() != dim) throw ProviderError("provider dimension changed between batches");
    }
  }
  return out;
}

std::vector<EmbeddingVector> CachingEmbedder::embed(std::span<const std::string> texts) {
  const std::string prefix = inner_.id() + '\x1f';
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_pos;
  {
    std::shared_lock lock(mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto it = cache_.find(prefix + texts[i]);
      if (it != cache_.end()) {
        out[i] = it->second;
      } else {
        missing.push_back(texts[i]);
        missing_pos.push_back(i);
      }
    }
  }
  if (missing.empty()) return out;

  auto fresh = inner_.embed(missing);
  std::unique_lock lock(mu_);
  misses_ += missing.size();
  for (std::size_t k = 0; k < missing.size(); ++k) {
    cache_.insert_or_assign(prefix + missing[k], fresh[k]);
    out[missing_pos[k]] = std::move(fresh[k]);
  }
  return out;
}

std::size_t CachingEmbedder::size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

}  // namespace qrw
