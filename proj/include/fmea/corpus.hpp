// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fmea/embedding.hpp"
#include "fmea/model.hpp"

namespace fmea {

enum class SplitPart { train, validation, test };

std::string_view split_part_name(SplitPart part);
SplitPart parse_split_part(std::string_view name);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;

  const std::vector<std::string>& ids(SplitPart part) const;
};

/// Sort ids, apply the seeded permutation, then cut: |train| = floor(N*r_train),
/// |validation| = floor(N*r_validation), remainder to test. Throws
/// EMPTY_CORPUS or INVALID_RATIOS.
CorpusSplit split_ids(std::vector<std::string> ids, std::uint64_t seed, SplitRatios ratios = {});

Json to_json(const CorpusSplit& split);
CorpusSplit split_from_json(const Json& j);

struct StoredDocument {
  FmeaDocument doc;
  std::string content_hash;
  std::string ingested_at;  // ISO-8601 UTC
};

/// FMEA library persisted as one canonical JSON file per document plus a
/// manifest:
///
///   <dir>/<doc_id>.json
///   <dir>/manifest.json          ids + content hashes
///   <dir>/splits/<seed>.json
///   <dir>/embeddings.json        cache keyed by (provider id, text hash)
///
/// A default-constructed store lives in memory only. Reads may run
/// concurrently; writes are serialized.
class CorpusStore {
 public:
  CorpusStore() = default;
  /// Opens (creating if needed) a corpus directory. A document whose bytes
  /// no longer match the manifest hash fails with CORRUPT_CORPUS.
  explicit CorpusStore(std::filesystem::path dir);

  CorpusStore(const CorpusStore&) = delete;
  CorpusStore& operator=(const CorpusStore&) = delete;

  /// Throws DUPLICATE_ID or INVALID_DOCUMENT (detail = violations).
  std::string ingest(const FmeaDocument& doc);

  /// Throws NOT_FOUND.
  FmeaDocument get(const std::string& doc_id) const;
  StoredDocument stored(const std::string& doc_id) const;
  bool contains(const std::string& doc_id) const;
  size_t size() const;

  /// All ids, ascending.
  std::vector<std::string> list() const;
  std::vector<std::string> list(Provenance provenance) const;
  std::vector<std::string> list(const CorpusSplit& split, SplitPart part) const;

  CorpusSplit make_split(std::uint64_t seed, SplitRatios ratios = {}) const;
  void save_split(const CorpusSplit& split);
  std::optional<CorpusSplit> load_split(std::uint64_t seed) const;
  /// Saved split if it still partitions the current corpus, else a fresh one.
  CorpusSplit split_for(std::uint64_t seed, SplitRatios ratios = {}) const;

  EmbeddingCache& embeddings() { return embeddings_; }
  /// Fills the cache with the short_description embedding of every document.
  size_t embed_all(const Embedder& embedder);
  void save_embeddings() const;

  const std::filesystem::path& dir() const { return dir_; }
  bool persistent() const { return !dir_.empty(); }

 private:
  void write_manifest_locked() const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, StoredDocument> docs_;
  EmbeddingCache embeddings_;
};

/// Writes bytes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace fmea
