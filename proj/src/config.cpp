// SPDX-License-Identifier: Apache-2.0
#include "fmea/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdlib>
#include <set>

#include "fmea/error.hpp"
#include "fmea/text.hpp"

namespace fmea {

namespace {

namespace pt = boost::property_tree;

std::string unquote(const std::string& raw) {
  auto v = trim(raw);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

template <typename T>
T number(const std::string& key, const std::string& raw) {
  const auto v = unquote(raw);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw Error("INVALID_CONFIG", key + ": expected a number, got '" + v + "'", {{"key", key}});
  return out;
}

template <>
double number<double>(const std::string& key, const std::string& raw) {
  const auto v = unquote(raw);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw Error("INVALID_CONFIG", key + ": expected a number, got '" + v + "'", {{"key", key}});
  return out;
}

// Applies one top-level key; used for both file entries and env values.
void apply_key(CliConfig& cfg, const std::string& key, const std::string& raw) {
  const auto v = unquote(raw);
  if (key == "corpus_dir") cfg.corpus_dir = v;
  else if (key == "sessions_dir") cfg.sessions_dir = v;
  else if (key == "ui_dir") cfg.ui_dir = v;
  else if (key == "lookup_map") cfg.lookup_map = v;
  else if (key == "port") cfg.port = number<int>(key, v);
  else if (key == "k_shots") cfg.k_shots = number<size_t>(key, v);
  else if (key == "seed") cfg.seed = number<std::uint64_t>(key, v);
  else if (key == "vote_threshold") cfg.vote_threshold = number<double>(key, v);
  else if (key == "fuzzy_threshold") cfg.fuzzy_threshold = number<double>(key, v);
  else if (key == "embedder") cfg.embedder = v;
  else if (key == "embed_dim") cfg.embed_dim = number<long>(key, v);
  else if (key == "max_in_flight") cfg.max_in_flight = number<size_t>(key, v);
  else if (key == "global_in_flight") cfg.global_in_flight = number<size_t>(key, v);
  else throw Error("INVALID_CONFIG", "unknown key '" + key + "'", {{"key", key}});
}

ProviderConfig provider_from(const std::string& id, const pt::ptree& section) {
  ProviderConfig p;
  p.provider_id = id;
  p.kind = ProviderKind::remote_http;
  for (const auto& [key, node] : section) {
    const std::string where = "provider." + id + "." + key;
    const auto raw = node.get_value<std::string>();
    if (key == "kind") p.kind = parse_provider_kind(unquote(raw));
    else if (key == "endpoint") p.endpoint = unquote(raw);
    else if (key == "auth_token") p.auth_token = unquote(raw);
    else if (key == "max_tokens") p.params.max_tokens = number<int>(where, raw);
    else if (key == "temperature") p.params.temperature = number<double>(where, raw);
    else if (key == "seed") p.params.seed = number<std::int64_t>(where, raw);
    else if (key == "retries") p.retries = number<int>(where, raw);
    else if (key == "backoff_ms") p.backoff_base = std::chrono::milliseconds(number<long>(where, raw));
    else if (key == "timeout_ms") p.timeout = std::chrono::milliseconds(number<long>(where, raw));
    else throw Error("INVALID_CONFIG", "unknown key '" + where + "'", {{"key", where}});
  }
  return p;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

CliConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  CliConfig cfg;
  auto path = file;
  if (!path)
    if (auto p = env("FMEA_CONFIG")) path = *p;
  if (path) {
    if (!std::filesystem::exists(*path)) throw Error("IO_ERROR", "config file not found: " + path->string());
    pt::ptree tree;
    try {
      pt::read_ini(path->string(), tree);
    } catch (const pt::ini_parser_error& e) {
      throw Error("INVALID_CONFIG", e.what());
    }
    for (const auto& [key, node] : tree) {
      if (node.empty()) {
        apply_key(cfg, key, node.get_value<std::string>());
      } else if (key.rfind("provider.", 0) == 0 && key.size() > 9) {
        cfg.providers.push_back(provider_from(key.substr(9), node));
      } else {
        throw Error("INVALID_CONFIG", "unknown section [" + key + "]", {{"key", key}});
      }
    }
  }
  static const std::pair<const char*, const char*> kEnvKeys[] = {
      {"FMEA_CORPUS_DIR", "corpus_dir"}, {"FMEA_SESSIONS_DIR", "sessions_dir"}, {"FMEA_UI_DIR", "ui_dir"},
      {"FMEA_LOOKUP_MAP", "lookup_map"}, {"FMEA_PORT", "port"},                 {"FMEA_K_SHOTS", "k_shots"},
      {"FMEA_SEED", "seed"},             {"FMEA_EMBEDDER", "embedder"},         {"FMEA_EMBED_DIM", "embed_dim"},
  };
  for (const auto& [var, key] : kEnvKeys)
    if (auto v = env(var)) apply_key(cfg, key, *v);
  return cfg;
}

std::vector<ProviderConfig> resolve_providers(const CliConfig& cfg) {
  std::shared_ptr<const LookupMap> lookup;
  if (!cfg.lookup_map.empty() && std::filesystem::exists(cfg.lookup_map))
    lookup = std::make_shared<const LookupMap>(load_lookup_map(cfg.lookup_map));
  std::vector<ProviderConfig> out = {mock_provider(ProviderKind::mock_echo_shot),
                                     mock_provider(ProviderKind::mock_lookup, lookup),
                                     mock_provider(ProviderKind::mock_noise)};
  std::set<std::string> ids;
  for (const auto& p : out) ids.insert(p.provider_id);
  for (const auto& p : cfg.providers) {
    auto resolved = with_env_overrides(p);
    if (resolved.kind == ProviderKind::mock_lookup && !resolved.lookup) resolved.lookup = lookup;
    validate_provider(resolved);
    if (!ids.insert(resolved.provider_id).second)
      throw Error("INVALID_CONFIG", "duplicate provider id '" + resolved.provider_id + "'");
    out.push_back(std::move(resolved));
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const CliConfig& cfg) {
  if (cfg.embed_dim < 1) throw Error("INVALID_CONFIG", "embed_dim must be >= 1");
  if (cfg.embedder == "builtin-hash") return std::make_unique<HashEmbedder>(cfg.embed_dim);
  if (cfg.embedder == "remote") return RemoteEmbedder::from_env(cfg.embed_dim);
  throw Error("INVALID_CONFIG", "unknown embedder '" + cfg.embedder + "'", {{"key", "embedder"}});
}

}  // namespace fmea
