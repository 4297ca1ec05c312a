// SPDX-License-Identifier: Apache-2.0
//
// Operator configuration. Sources, lowest precedence first:
//
//   1. built-in defaults
//   2. config file (TOML-style key = value, path from --config or FMEA_CONFIG)
//   3. environment (FMEA_CORPUS_DIR, FMEA_SESSIONS_DIR, FMEA_UI_DIR,
//      FMEA_LOOKUP_MAP, FMEA_PORT, FMEA_K_SHOTS, FMEA_SEED, FMEA_EMBEDDER,
//      FMEA_EMBED_DIM, and FMEA_LLM_URL_<ID> / FMEA_LLM_TOKEN_<ID> per provider)
//   4. command-line flags, applied by the caller
//
// File layout:
//
//   corpus_dir = "data/corpus"
//   port = 8080
//   [provider.gpt4]
//   kind = "remote_http"
//   endpoint = "http://localhost:9000/v1/complete"
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fmea/embedding.hpp"
#include "fmea/gateway.hpp"

namespace fmea {

struct CliConfig {
  std::filesystem::path corpus_dir = "corpus";
  std::filesystem::path sessions_dir = "sessions";
  std::filesystem::path ui_dir;
  std::filesystem::path lookup_map = "fixtures/lookup.json";
  int port = 8080;
  size_t k_shots = 3;
  std::uint64_t seed = 7;
  double vote_threshold = 0.5;
  double fuzzy_threshold = 0.85;
  std::string embedder = "builtin-hash";  // or "remote"
  long embed_dim = HashEmbedder::kDefaultDim;
  size_t max_in_flight = 4;   // per provider
  size_t global_in_flight = 8;
  std::vector<ProviderConfig> providers;  // declared in the file
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// getenv, treating empty values as unset.
std::optional<std::string> process_env(const std::string& name);

/// Throws INVALID_CONFIG with the offending key, or IO_ERROR for an
/// unreadable file.
CliConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

/// Built-in mocks (mock_echo_shot, mock_lookup, mock_noise) followed by the
/// configured providers with their env overrides applied. The lookup map is
/// loaded when the file exists. Throws INVALID_CONFIG on duplicate ids.
std::vector<ProviderConfig> resolve_providers(const CliConfig& cfg);

std::unique_ptr<Embedder> make_embedder(const CliConfig& cfg);

}  // namespace fmea
