// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace fmea {

using Json = nlohmann::ordered_json;

struct EmbeddingVector {
  Eigen::VectorXd values;
  std::string provider_id;

  Eigen::Index dim() const { return values.size(); }
  bool operator==(const EmbeddingVector& o) const {
    return provider_id == o.provider_id && values.size() == o.values.size() && values == o.values;
  }
};

/// dot(a,b) / (|a||b|), clamped to [-1, 1]. Throws PROVIDER_MISMATCH,
/// DIMENSION_MISMATCH or ZERO_VECTOR.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual Eigen::Index dim() const = 0;
  /// Throws EMPTY_TEXT for blank input; remote implementations throw
  /// PROVIDER_UNAVAILABLE.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
};

/// Offline bag-of-words embedder: each token of the trimmed, lowercased text
/// is hashed (FNV-1a) into one of dim buckets and counted.
class HashEmbedder final : public Embedder {
 public:
  static constexpr Eigen::Index kDefaultDim = 256;

  explicit HashEmbedder(Eigen::Index dim = kDefaultDim);

  std::string id() const override { return "builtin-hash"; }
  Eigen::Index dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  Eigen::Index dim_;
};

/// HTTP embedder: POST {"input": [...]} -> {"embeddings": [[...], ...]}.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string url, std::string token, Eigen::Index dim,
                 std::chrono::milliseconds timeout = std::chrono::seconds(30));

  /// Reads FMEA_EMBED_URL / FMEA_EMBED_TOKEN.
  static std::unique_ptr<RemoteEmbedder> from_env(Eigen::Index dim);

  std::string id() const override { return "remote"; }
  Eigen::Index dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;

 private:
  std::string url_;
  std::string token_;
  Eigen::Index dim_;
  std::chrono::milliseconds timeout_;
};

/// Thread-safe memo of embeddings keyed by (provider id, text hash).
class EmbeddingCache {
 public:
  std::optional<EmbeddingVector> find(const std::string& provider_id, std::string_view text) const;
  void put(std::string_view text, const EmbeddingVector& v);
  /// Drops every entry whose provider or dimension differs from the embedder.
  void retain_only(const Embedder& embedder);
  void clear();
  size_t size() const;

  Json to_json() const;
  /// Replaces the contents with a previously serialized cache.
  void load(const Json& j);

 private:
  using Key = std::pair<std::string, std::uint64_t>;
  mutable std::shared_mutex mu_;
  std::map<Key, EmbeddingVector> entries_;
};

struct ExampleCandidate {
  std::string doc_id;
  std::optional<double> score;  // nullopt = "unscored" (random draws)
  std::string preview;

  bool operator==(const ExampleCandidate&) const = default;
};

Json to_json(const ExampleCandidate& c);
ExampleCandidate candidate_from_json(const Json& j);

struct PoolEntry {
  std::string doc_id;
  std::string text;  // text that gets embedded for this document
  std::string preview;
};

struct RetrievalOptions {
  size_t max_in_flight = 4;
};

/// Exact scan: embed query and pool, keep the top min(k, |pool|) by
/// descending cosine, ties by ascending doc_id. Embedding of pool entries
/// fans out over at most max_in_flight concurrent calls; the result does not
/// depend on completion order.
std::vector<ExampleCandidate> rank_candidates(const std::string& query_text,
                                              const std::vector<PoolEntry>& pool, size_t k,
                                              const Embedder& embedder,
                                              EmbeddingCache* cache = nullptr,
                                              RetrievalOptions options = {});

/// Ranking step alone, on precomputed embeddings.
std::vector<ExampleCandidate> rank_embedded(const EmbeddingVector& query,
                                            const std::vector<std::pair<PoolEntry, EmbeddingVector>>& pool,
                                            size_t k);

/// Seeded uniform draw; the candidate is returned unscored. Throws EMPTY_POOL.
ExampleCandidate random_candidate(const std::vector<PoolEntry>& pool, std::uint64_t seed);

}  // namespace fmea
