// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "fmea/prompt.hpp"

namespace fmea {

enum class ProviderKind { remote_http, mock_echo_shot, mock_lookup, mock_noise };

std::string_view provider_kind_name(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);

/// Query input text -> formatted output block, for mock_lookup.
using LookupMap = std::map<std::string, std::string>;

LookupMap load_lookup_map(const std::filesystem::path& path);

struct ProviderParams {
  int max_tokens = 512;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
};

struct ProviderConfig {
  std::string provider_id;
  ProviderKind kind = ProviderKind::mock_echo_shot;
  std::string endpoint;  // remote_http only
  std::string auth_token;
  ProviderParams params;
  int retries = 2;  // re-attempts after the first call
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds timeout{60000};
  std::shared_ptr<const LookupMap> lookup;  // mock_lookup only
};

/// Throws INVALID_CONFIG on temperature < 0, max_tokens < 1, an empty id, or
/// a remote provider without an endpoint.
void validate_provider(const ProviderConfig& cfg);

/// Fills endpoint/token from FMEA_LLM_URL_<ID> and FMEA_LLM_TOKEN_<ID>,
/// where <ID> is the provider id uppercased with non-alphanumerics as '_'.
ProviderConfig with_env_overrides(ProviderConfig cfg);

/// Built-in offline providers, ids equal to their kind names.
ProviderConfig mock_provider(ProviderKind kind, std::shared_ptr<const LookupMap> lookup = nullptr);

struct LlmResponse {
  std::string text;
  std::string provider_id;
  double latency_ms = 0;
  std::uint64_t prompt_hash = 0;
};

/// 64-bit FNV-1a of the rendered prompt bytes.
std::uint64_t prompt_hash(std::string_view rendered);

/// Body of the first "OUTPUT:" stanza up to and including its "### END"
/// line; empty when the prompt carries no shots.
std::string first_shot_output(std::string_view rendered);
/// The text between the last "INPUT: " and the trailing "\nOUTPUT:\n".
std::string final_query_input(std::string_view rendered);

/// One completion, no concurrency limits. Remote failures throw
/// PROVIDER_TIMEOUT or PROVIDER_HTTP_ERROR once retries are exhausted.
LlmResponse complete(const PromptSpec& prompt, const ProviderConfig& cfg);

struct GatewayLimits {
  size_t per_provider = 4;
  size_t global = 8;
};

/// complete() behind per-provider and global in-flight caps. Safe to call
/// from many threads.
class Gateway {
 public:
  explicit Gateway(GatewayLimits limits = {}) : limits_(limits) {}

  LlmResponse complete(const PromptSpec& prompt, const ProviderConfig& cfg);

  size_t peak_in_flight() const;
  const GatewayLimits& limits() const { return limits_; }

 private:
  GatewayLimits limits_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, size_t> per_provider_;
  size_t global_ = 0;
  size_t peak_ = 0;
};

}  // namespace fmea
