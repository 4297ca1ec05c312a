// SPDX-License-Identifier: Apache-2.0
#include "fmea/gateway.hpp"

#include <cctype>
#include <cstdlib>
#include <random>
#include <thread>

#include "fmea/corpus.hpp"
#include "fmea/error.hpp"
#include "fmea/http_client.hpp"
#include "fmea/random.hpp"
#include "fmea/text.hpp"

namespace fmea {

std::string_view provider_kind_name(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::remote_http: return "remote_http";
    case ProviderKind::mock_echo_shot: return "mock_echo_shot";
    case ProviderKind::mock_lookup: return "mock_lookup";
    case ProviderKind::mock_noise: return "mock_noise";
  }
  return "";
}

ProviderKind parse_provider_kind(std::string_view name) {
  for (auto k : {ProviderKind::remote_http, ProviderKind::mock_echo_shot, ProviderKind::mock_lookup,
                 ProviderKind::mock_noise})
    if (provider_kind_name(k) == name) return k;
  throw Error("INVALID_CONFIG", "unknown provider kind '" + std::string(name) + "'");
}

LookupMap load_lookup_map(const std::filesystem::path& path) {
  LookupMap map;
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error("INVALID_CONFIG", path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error("INVALID_CONFIG", path.string() + ": lookup map must be an object");
  for (const auto& [key, value] : j.items()) map[key] = value.get<std::string>();
  return map;
}

void validate_provider(const ProviderConfig& cfg) {
  if (cfg.provider_id.empty()) throw Error("INVALID_CONFIG", "provider id is empty");
  if (cfg.params.temperature < 0)
    throw Error("INVALID_CONFIG", "provider '" + cfg.provider_id + "': temperature must be >= 0");
  if (cfg.params.max_tokens < 1)
    throw Error("INVALID_CONFIG", "provider '" + cfg.provider_id + "': max_tokens must be >= 1");
  if (cfg.kind == ProviderKind::remote_http && cfg.endpoint.empty())
    throw Error("INVALID_CONFIG", "provider '" + cfg.provider_id + "' has no endpoint");
  if (cfg.retries < 0) throw Error("INVALID_CONFIG", "retries must be >= 0");
}

ProviderConfig with_env_overrides(ProviderConfig cfg) {
  std::string key;
  for (char c : cfg.provider_id)
    key.push_back(std::isalnum(static_cast<unsigned char>(c))
                      ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                      : '_');
  if (const char* url = std::getenv(("FMEA_LLM_URL_" + key).c_str()); url && *url) cfg.endpoint = url;
  if (const char* tok = std::getenv(("FMEA_LLM_TOKEN_" + key).c_str()); tok && *tok) cfg.auth_token = tok;
  return cfg;
}

ProviderConfig mock_provider(ProviderKind kind, std::shared_ptr<const LookupMap> lookup) {
  ProviderConfig cfg;
  cfg.provider_id = std::string(provider_kind_name(kind));
  cfg.kind = kind;
  cfg.lookup = std::move(lookup);
  return cfg;
}

std::uint64_t prompt_hash(std::string_view rendered) { return fnv1a64(rendered); }

std::string first_shot_output(std::string_view rendered) {
  static constexpr std::string_view kOutput = "\nOUTPUT:\n";
  auto out = rendered.find(kOutput);
  if (out == std::string_view::npos) return "";
  auto body = rendered.substr(out + kOutput.size());
  // The block ends at its first "### END" line.
  size_t pos = 0;
  while (pos < body.size()) {
    size_t eol = body.find('\n', pos);
    auto line = body.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (trim(line) == "### END") return std::string(body.substr(0, pos + line.size()));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return "";
}

std::string final_query_input(std::string_view rendered) {
  static constexpr std::string_view kInput = "INPUT: ";
  static constexpr std::string_view kTail = "\nOUTPUT:\n";
  auto start = rendered.rfind(kInput);
  if (start == std::string_view::npos) return "";
  auto body = rendered.substr(start + kInput.size());
  if (body.size() >= kTail.size() && body.substr(body.size() - kTail.size()) == kTail)
    body.remove_suffix(kTail.size());
  return std::string(body);
}

namespace {

std::string noise_text(std::uint64_t seed) {
  static constexpr std::string_view kSyllables[] = {"ka", "lo", "mi", "ne", "su", "ra", "ti",
                                                    "vo", "ze", "pu", "qa", "do", "fe", "gi"};
  std::mt19937_64 rng(seed);
  std::string out;
  const auto words = 20 + uniform_below(rng, 20);
  for (std::uint64_t w = 0; w < words; ++w) {
    const auto syllables = 1 + uniform_below(rng, 3);
    for (std::uint64_t s = 0; s < syllables; ++s) out += kSyllables[uniform_below(rng, std::size(kSyllables))];
    out += (uniform_below(rng, 8) == 0) ? '\n' : ' ';
  }
  return out;
}

LlmResponse call_remote(const PromptSpec& prompt, const ProviderConfig& cfg) {
  Json body;
  body["prompt"] = prompt.rendered;
  body["max_tokens"] = cfg.params.max_tokens;
  body["temperature"] = cfg.params.temperature;
  body["seed"] = cfg.params.seed ? Json(*cfg.params.seed) : Json(nullptr);
  const auto payload = body.dump();

  std::string last_error;
  bool last_was_timeout = false;
  auto backoff = cfg.backoff_base;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = http_post_json(cfg.endpoint, cfg.auth_token, payload, cfg.timeout);
    if (!res.transport_ok()) {
      last_was_timeout = res.failure == HttpResult::Failure::timeout;
      last_error = res.error;
      continue;
    }
    if (res.status >= 200 && res.status < 300) {
      try {
        auto reply = Json::parse(res.body);
        return {reply.at("text").get<std::string>(), cfg.provider_id, 0, 0};
      } catch (const Json::exception& e) {
        throw Error("PROVIDER_HTTP_ERROR",
                    "provider '" + cfg.provider_id + "' returned malformed JSON: " + e.what());
      }
    }
    last_was_timeout = false;
    last_error = "HTTP " + std::to_string(res.status);
    const bool retryable = res.status == 429 || res.status >= 500;
    if (!retryable) break;
  }
  throw Error(last_was_timeout ? "PROVIDER_TIMEOUT" : "PROVIDER_HTTP_ERROR",
              "provider '" + cfg.provider_id + "' failed: " + last_error,
              Json{{"provider_id", cfg.provider_id}});
}

}  // namespace

LlmResponse complete(const PromptSpec& prompt, const ProviderConfig& cfg) {
  if (prompt.rendered.empty()) throw Error("EMPTY_INPUT", "rendered prompt is empty");
  validate_provider(cfg);
  const auto started = std::chrono::steady_clock::now();
  const auto hash = prompt_hash(prompt.rendered);

  LlmResponse response;
  switch (cfg.kind) {
    case ProviderKind::remote_http:
      response = call_remote(prompt, cfg);
      break;
    case ProviderKind::mock_echo_shot:
      response.text = first_shot_output(prompt.rendered);
      break;
    case ProviderKind::mock_lookup:
      if (cfg.lookup) {
        auto it = cfg.lookup->find(final_query_input(prompt.rendered));
        if (it != cfg.lookup->end()) response.text = it->second;
      }
      break;
    case ProviderKind::mock_noise:
      response.text = noise_text(hash ^ static_cast<std::uint64_t>(cfg.params.seed.value_or(0)));
      break;
  }
  response.provider_id = cfg.provider_id;
  response.prompt_hash = hash;
  response.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return response;
}

LlmResponse Gateway::complete(const PromptSpec& prompt, const ProviderConfig& cfg) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] {
      return global_ < limits_.global && per_provider_[cfg.provider_id] < limits_.per_provider;
    });
    ++global_;
    ++per_provider_[cfg.provider_id];
    peak_ = std::max(peak_, global_);
  }
  struct Release {
    Gateway* self;
    const std::string& id;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->global_;
        --self->per_provider_[id];
      }
      self->cv_.notify_all();
    }
  } release{this, cfg.provider_id};
  return fmea::complete(prompt, cfg);
}

size_t Gateway::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

}  // namespace fmea
