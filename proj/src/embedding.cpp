// SPDX-License-Identifier: Apache-2.0
#include "fmea/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "fmea/error.hpp"
#include "fmea/http_client.hpp"
#include "fmea/random.hpp"
#include "fmea/text.hpp"

namespace fmea {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.provider_id != b.provider_id)
    throw Error("PROVIDER_MISMATCH",
                "cannot compare embeddings from '" + a.provider_id + "' and '" + b.provider_id + "'");
  if (a.dim() != b.dim())
    throw Error("DIMENSION_MISMATCH", "embedding dimensions differ: " + std::to_string(a.dim()) +
                                          " vs " + std::to_string(b.dim()));
  const double na = a.values.norm();
  const double nb = b.values.norm();
  if (na == 0.0 || nb == 0.0) throw Error("ZERO_VECTOR", "cosine of a zero vector is undefined");
  return std::clamp(a.values.dot(b.values) / (na * nb), -1.0, 1.0);
}

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

// ---------------------------------------------------------------- builtin

HashEmbedder::HashEmbedder(Eigen::Index dim) : dim_(dim) {
  if (dim_ < 1) throw Error("INVALID_CONFIG", "embedding dimension must be positive");
}

EmbeddingVector HashEmbedder::embed(std::string_view text) const {
  std::string trimmed = trim(text);
  if (trimmed.empty()) throw Error("EMPTY_TEXT", "cannot embed empty text");
  EmbeddingVector v{Eigen::VectorXd::Zero(dim_), id()};
  for (const auto& token : tokenize(trimmed))
    v.values[static_cast<Eigen::Index>(fnv1a64(token) % static_cast<std::uint64_t>(dim_))] += 1.0;
  return v;
}

// ---------------------------------------------------------------- remote

RemoteEmbedder::RemoteEmbedder(std::string url, std::string token, Eigen::Index dim,
                               std::chrono::milliseconds timeout)
    : url_(std::move(url)), token_(std::move(token)), dim_(dim), timeout_(timeout) {}

std::unique_ptr<RemoteEmbedder> RemoteEmbedder::from_env(Eigen::Index dim) {
  const char* url = std::getenv("FMEA_EMBED_URL");
  if (!url || !*url) throw Error("INVALID_CONFIG", "FMEA_EMBED_URL is not set");
  const char* token = std::getenv("FMEA_EMBED_TOKEN");
  return std::make_unique<RemoteEmbedder>(url, token ? token : "", dim);
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  return embed_batch({std::string(text)}).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
  Json req;
  req["input"] = Json::array();
  for (const auto& t : texts) {
    std::string trimmed = trim(t);
    if (trimmed.empty()) throw Error("EMPTY_TEXT", "cannot embed empty text");
    req["input"].push_back(trimmed);
  }
  auto res = http_post_json(url_, token_, req.dump(), timeout_);
  if (!res.transport_ok())
    throw Error("PROVIDER_UNAVAILABLE", "embedding endpoint unreachable: " + res.error);
  if (res.status < 200 || res.status >= 300)
    throw Error("PROVIDER_UNAVAILABLE", "embedding endpoint returned HTTP " + std::to_string(res.status));

  std::vector<EmbeddingVector> out;
  try {
    auto body = Json::parse(res.body);
    const auto& rows = body.at("embeddings");
    if (rows.size() != texts.size())
      throw Error("PROVIDER_UNAVAILABLE", "embedding endpoint returned a wrong number of vectors");
    for (const auto& row : rows) {
      if (static_cast<Eigen::Index>(row.size()) != dim_)
        throw Error("DIMENSION_MISMATCH", "remote embedding has dimension " + std::to_string(row.size()) +
                                              ", expected " + std::to_string(dim_));
      EmbeddingVector v{Eigen::VectorXd(dim_), id()};
      for (Eigen::Index i = 0; i < dim_; ++i) {
        double x = row.at(static_cast<size_t>(i)).get<double>();
        if (!std::isfinite(x)) throw Error("PROVIDER_UNAVAILABLE", "remote embedding is not finite");
        v.values[i] = x;
      }
      out.push_back(std::move(v));
    }
  } catch (const Json::exception& e) {
    throw Error("PROVIDER_UNAVAILABLE", std::string("malformed embedding response: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------- cache

std::optional<EmbeddingVector> EmbeddingCache::find(const std::string& provider_id,
                                                    std::string_view text) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find({provider_id, fnv1a64(trim(text))});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(std::string_view text, const EmbeddingVector& v) {
  std::unique_lock lock(mu_);
  entries_[{v.provider_id, fnv1a64(trim(text))}] = v;
}

void EmbeddingCache::retain_only(const Embedder& embedder) {
  std::unique_lock lock(mu_);
  std::erase_if(entries_, [&](const auto& kv) {
    return kv.second.provider_id != embedder.id() || kv.second.dim() != embedder.dim();
  });
}

void EmbeddingCache::clear() {
  std::unique_lock lock(mu_);
  entries_.clear();
}

size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

Json EmbeddingCache::to_json() const {
  std::shared_lock lock(mu_);
  Json arr = Json::array();
  for (const auto& [key, v] : entries_) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < v.dim(); ++i) values.push_back(v.values[i]);
    arr.push_back({{"provider_id", key.first}, {"text_hash", hex64(key.second)}, {"values", values}});
  }
  return {{"entries", arr}};
}

void EmbeddingCache::load(const Json& j) {
  std::map<Key, EmbeddingVector> loaded;
  for (const auto& e : j.at("entries")) {
    const auto& values = e.at("values");
    EmbeddingVector v{Eigen::VectorXd(static_cast<Eigen::Index>(values.size())),
                      e.at("provider_id").get<std::string>()};
    for (size_t i = 0; i < values.size(); ++i) v.values[static_cast<Eigen::Index>(i)] = values[i].get<double>();
    auto hash = std::stoull(e.at("text_hash").get<std::string>(), nullptr, 16);
    loaded[{v.provider_id, hash}] = std::move(v);
  }
  std::unique_lock lock(mu_);
  entries_ = std::move(loaded);
}

// ---------------------------------------------------------------- ranking

Json to_json(const ExampleCandidate& c) {
  return {{"doc_id", c.doc_id},
          {"score", c.score ? Json(*c.score) : Json("unscored")},
          {"preview", c.preview}};
}

ExampleCandidate candidate_from_json(const Json& j) {
  ExampleCandidate c;
  c.doc_id = j.at("doc_id").get<std::string>();
  const auto& s = j.at("score");
  if (s.is_number()) c.score = s.get<double>();
  c.preview = j.at("preview").get<std::string>();
  return c;
}

std::vector<ExampleCandidate> rank_embedded(
    const EmbeddingVector& query, const std::vector<std::pair<PoolEntry, EmbeddingVector>>& pool,
    size_t k) {
  std::vector<ExampleCandidate> scored;
  scored.reserve(pool.size());
  for (const auto& [entry, vec] : pool)
    scored.push_back({entry.doc_id, cosine(query, vec), entry.preview});
  std::sort(scored.begin(), scored.end(), [](const ExampleCandidate& a, const ExampleCandidate& b) {
    if (*a.score != *b.score) return *a.score > *b.score;
    return a.doc_id < b.doc_id;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

namespace {

EmbeddingVector embed_cached(const std::string& text, const Embedder& embedder, EmbeddingCache* cache) {
  if (cache) {
    if (auto hit = cache->find(embedder.id(), text); hit && hit->dim() == embedder.dim()) return *hit;
  }
  auto v = embedder.embed(text);
  if (cache) cache->put(text, v);
  return v;
}

}  // namespace

std::vector<ExampleCandidate> rank_candidates(const std::string& query_text,
                                              const std::vector<PoolEntry>& pool, size_t k,
                                              const Embedder& embedder, EmbeddingCache* cache,
                                              RetrievalOptions options) {
  if (pool.empty()) throw Error("EMPTY_POOL", "candidate pool is empty");
  if (k < 1) throw Error("INVALID_ARGUMENT", "k must be at least 1");
  auto query = embedder.embed(query_text);

  std::vector<std::optional<EmbeddingVector>> vectors(pool.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (size_t i = next++; i < pool.size(); i = next++) {
      try {
        vectors[i] = embed_cached(pool[i].text, embedder, cache);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  size_t workers = std::min(std::max<size_t>(options.max_in_flight, 1), pool.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::pair<PoolEntry, EmbeddingVector>> embedded;
  embedded.reserve(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) embedded.emplace_back(pool[i], std::move(*vectors[i]));
  return rank_embedded(query, embedded, k);
}

ExampleCandidate random_candidate(const std::vector<PoolEntry>& pool, std::uint64_t seed) {
  if (pool.empty()) throw Error("EMPTY_POOL", "candidate pool is empty");
  std::mt19937_64 rng(seed);
  const auto& pick = pool[static_cast<size_t>(uniform_below(rng, pool.size()))];
  return {pick.doc_id, std::nullopt, pick.preview};
}

}  // namespace fmea
