// SPDX-License-Identifier: Apache-2.0
#include "fmea/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "fmea/error.hpp"
#include "fmea/random.hpp"
#include "fmea/text.hpp"

namespace fmea {

namespace fs = std::filesystem;

std::string_view split_part_name(SplitPart part) {
  switch (part) {
    case SplitPart::train: return "train";
    case SplitPart::validation: return "validation";
    case SplitPart::test: return "test";
  }
  return "train";
}

SplitPart parse_split_part(std::string_view name) {
  if (name == "train") return SplitPart::train;
  if (name == "validation") return SplitPart::validation;
  if (name == "test") return SplitPart::test;
  throw Error("INVALID_ARGUMENT", "unknown split part '" + std::string(name) + "'");
}

const std::vector<std::string>& CorpusSplit::ids(SplitPart part) const {
  switch (part) {
    case SplitPart::train: return train_ids;
    case SplitPart::validation: return validation_ids;
    case SplitPart::test: return test_ids;
  }
  return train_ids;
}

CorpusSplit split_ids(std::vector<std::string> ids, std::uint64_t seed, SplitRatios ratios) {
  if (ids.empty()) throw Error("EMPTY_CORPUS", "cannot split an empty corpus");
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
    throw Error("INVALID_RATIOS", "split ratios must be non-negative and sum to 1");

  std::sort(ids.begin(), ids.end());
  seeded_shuffle(ids, seed);

  // The epsilon absorbs products like 0.29 * 100 = 28.999999999999996.
  const auto n = static_cast<double>(ids.size());
  auto n_train = static_cast<size_t>(std::floor(n * ratios.train + 1e-9));
  auto n_val = static_cast<size_t>(std::floor(n * ratios.validation + 1e-9));
  n_train = std::min(n_train, ids.size());
  n_val = std::min(n_val, ids.size() - n_train);

  CorpusSplit split;
  split.seed = seed;
  split.ratios = ratios;
  split.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                              ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return split;
}

Json to_json(const CorpusSplit& split) {
  return {{"seed", split.seed},
          {"ratios", {split.ratios.train, split.ratios.validation, split.ratios.test}},
          {"train", split.train_ids},
          {"validation", split.validation_ids},
          {"test", split.test_ids}};
}

CorpusSplit split_from_json(const Json& j) {
  CorpusSplit s;
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& r = j.at("ratios");
  s.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
  s.train_ids = j.at("train").get<std::vector<std::string>>();
  s.validation_ids = j.at("validation").get<std::vector<std::string>>();
  s.test_ids = j.at("test").get<std::vector<std::string>>();
  return s;
}

// ---------------------------------------------------------------- files

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IO_ERROR", "cannot write " + tmp.string());
    out << bytes;
    if (!out) throw Error("IO_ERROR", "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string canonical_bytes(const FmeaDocument& doc) { return to_json(doc).dump(2) + "\n"; }

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- store

CorpusStore::CorpusStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  auto manifest_path = dir_ / "manifest.json";
  if (fs::exists(manifest_path)) {
    Json manifest;
    try {
      manifest = Json::parse(read_file(manifest_path));
    } catch (const Json::exception& e) {
      throw Error("CORRUPT_CORPUS", "manifest.json is not valid JSON: " + std::string(e.what()));
    }
    for (const auto& entry : manifest.at("documents")) {
      auto id = entry.at("doc_id").get<std::string>();
      auto file = dir_ / (id + ".json");
      auto bytes = read_file(file);
      auto hash = hex64(fnv1a64(bytes));
      if (hash != entry.at("hash").get<std::string>())
        throw Error("CORRUPT_CORPUS", file.string() + " does not match its manifest hash");
      FmeaDocument doc;
      try {
        doc = document_from_json(Json::parse(bytes));
      } catch (const Json::exception& e) {
        throw Error("CORRUPT_CORPUS", file.string() + ": " + e.what());
      }
      docs_.emplace(id, StoredDocument{std::move(doc), hash, entry.value("ingested_at", "")});
    }
  }
  auto cache_path = dir_ / "embeddings.json";
  if (fs::exists(cache_path)) {
    try {
      embeddings_.load(Json::parse(read_file(cache_path)));
    } catch (const std::exception&) {
      // A damaged cache is rebuilt on demand.
    }
  }
}

std::string CorpusStore::ingest(const FmeaDocument& doc) {
  auto result = validate_document(doc);
  if (!result.ok())
    throw Error("INVALID_DOCUMENT", "document '" + doc.doc_id + "' failed validation",
                violations_to_json(result.violations));

  std::unique_lock lock(mu_);
  if (docs_.count(doc.doc_id))
    throw Error("DUPLICATE_ID", "document '" + doc.doc_id + "' already exists", doc.doc_id);
  auto bytes = canonical_bytes(doc);
  StoredDocument stored{doc, hex64(fnv1a64(bytes)), utc_now()};
  if (persistent()) write_file_atomic(dir_ / (doc.doc_id + ".json"), bytes);
  docs_.emplace(doc.doc_id, std::move(stored));
  if (persistent()) write_manifest_locked();
  return doc.doc_id;
}

void CorpusStore::write_manifest_locked() const {
  Json docs = Json::array();
  for (const auto& [id, s] : docs_)
    docs.push_back({{"doc_id", id}, {"hash", s.content_hash}, {"ingested_at", s.ingested_at}});
  write_file_atomic(dir_ / "manifest.json", Json{{"documents", docs}}.dump(2) + "\n");
}

FmeaDocument CorpusStore::get(const std::string& doc_id) const { return stored(doc_id).doc; }

StoredDocument CorpusStore::stored(const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) throw Error("NOT_FOUND", "no document '" + doc_id + "'");
  return it->second;
}

bool CorpusStore::contains(const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  return docs_.count(doc_id) > 0;
}

size_t CorpusStore::size() const {
  std::shared_lock lock(mu_);
  return docs_.size();
}

std::vector<std::string> CorpusStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  ids.reserve(docs_.size());
  for (const auto& [id, s] : docs_) ids.push_back(id);
  return ids;
}

std::vector<std::string> CorpusStore::list(Provenance provenance) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : docs_)
    if (s.doc.provenance == provenance) ids.push_back(id);
  return ids;
}

std::vector<std::string> CorpusStore::list(const CorpusSplit& split, SplitPart part) const {
  auto ids = split.ids(part);
  std::sort(ids.begin(), ids.end());
  std::shared_lock lock(mu_);
  std::erase_if(ids, [&](const std::string& id) { return !docs_.count(id); });
  return ids;
}

CorpusSplit CorpusStore::make_split(std::uint64_t seed, SplitRatios ratios) const {
  return split_ids(list(), seed, ratios);
}

void CorpusStore::save_split(const CorpusSplit& split) {
  if (!persistent()) return;
  std::unique_lock lock(mu_);
  fs::create_directories(dir_ / "splits");
  write_file_atomic(dir_ / "splits" / (std::to_string(split.seed) + ".json"), to_json(split).dump(2) + "\n");
}

std::optional<CorpusSplit> CorpusStore::load_split(std::uint64_t seed) const {
  if (!persistent()) return std::nullopt;
  auto path = dir_ / "splits" / (std::to_string(seed) + ".json");
  std::shared_lock lock(mu_);
  if (!fs::exists(path)) return std::nullopt;
  return split_from_json(Json::parse(read_file(path)));
}

CorpusSplit CorpusStore::split_for(std::uint64_t seed, SplitRatios ratios) const {
  if (auto saved = load_split(seed)) {
    std::vector<std::string> all;
    for (auto part : {SplitPart::train, SplitPart::validation, SplitPart::test})
      all.insert(all.end(), saved->ids(part).begin(), saved->ids(part).end());
    std::sort(all.begin(), all.end());
    if (all == list()) return *saved;
  }
  return make_split(seed, ratios);
}

size_t CorpusStore::embed_all(const Embedder& embedder) {
  embeddings_.retain_only(embedder);
  size_t computed = 0;
  for (const auto& id : list()) {
    auto doc = get(id);
    if (embeddings_.find(embedder.id(), doc.short_description)) continue;
    embeddings_.put(doc.short_description, embedder.embed(doc.short_description));
    ++computed;
  }
  return computed;
}

void CorpusStore::save_embeddings() const {
  if (!persistent()) return;
  write_file_atomic(dir_ / "embeddings.json", embeddings_.to_json().dump() + "\n");
}

}  // namespace fmea
