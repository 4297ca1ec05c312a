// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fmea/config.hpp"

#include <fstream>
#include <map>

#include "fmea/error.hpp"
#include "helpers.hpp"

using namespace fmea;
using fmea::testing::TempDir;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::filesystem::path write_config(const TempDir& dir, const std::string& text) {
  auto path = dir.path() / "fmea.toml";
  std::ofstream(path) << text;
  return path;
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults without a file or environment") {
  auto cfg = load_config(std::nullopt, env_of({}));
  CHECK(cfg.corpus_dir == "corpus");
  CHECK(cfg.port == 8080);
  CHECK(cfg.k_shots == 3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.vote_threshold == 0.5);
  CHECK(cfg.fuzzy_threshold == 0.85);
  CHECK(cfg.embedder == "builtin-hash");
  CHECK(cfg.providers.empty());
}

TEST_CASE("file values, quoting and provider sections") {
  TempDir dir("config");
  auto path = write_config(dir, R"(corpus_dir = "data/corpus"
port = 9090
k_shots = 5
vote_threshold = 0.34

[provider.gpt4]
endpoint = "http://localhost:9000/v1/complete"
max_tokens = 256
temperature = 0.2
seed = 11
retries = 1
backoff_ms = 10
timeout_ms = 1500

[provider.echo2]
kind = mock_echo_shot
)");
  auto cfg = load_config(path, env_of({}));
  CHECK(cfg.corpus_dir == "data/corpus");
  CHECK(cfg.port == 9090);
  CHECK(cfg.k_shots == 5);
  CHECK(cfg.vote_threshold == doctest::Approx(0.34));
  REQUIRE(cfg.providers.size() == 2);
  const auto& gpt = cfg.providers[0];
  CHECK(gpt.provider_id == "gpt4");
  CHECK(gpt.kind == ProviderKind::remote_http);
  CHECK(gpt.endpoint == "http://localhost:9000/v1/complete");
  CHECK(gpt.params.max_tokens == 256);
  CHECK(gpt.params.temperature == doctest::Approx(0.2));
  CHECK(gpt.params.seed == 11);
  CHECK(gpt.retries == 1);
  CHECK(gpt.backoff_base.count() == 10);
  CHECK(gpt.timeout.count() == 1500);
  CHECK(cfg.providers[1].kind == ProviderKind::mock_echo_shot);

  // FMEA_CONFIG names the file when no explicit path is given.
  CHECK(load_config(std::nullopt, env_of({{"FMEA_CONFIG", path.string()}})).port == 9090);
}

TEST_CASE("environment overrides the file") {
  TempDir dir("config-env");
  auto path = write_config(dir, "port = 9090\nseed = 3\nsessions_dir = s1\n");
  auto cfg = load_config(path, env_of({{"FMEA_PORT", "7000"}, {"FMEA_SESSIONS_DIR", "s2"}, {"FMEA_EMBED_DIM", "64"}}));
  CHECK(cfg.port == 7000);
  CHECK(cfg.seed == 3);
  CHECK(cfg.sessions_dir == "s2");
  CHECK(cfg.embed_dim == 64);
  CHECK(make_embedder(cfg)->dim() == 64);
}

TEST_CASE("config errors name the key") {
  TempDir dir("config-bad");
  try {
    load_config(write_config(dir, "colour = blue\n"), env_of({}));
    FAIL("expected INVALID_CONFIG");
  } catch (const Error& e) {
    CHECK(e.code() == "INVALID_CONFIG");
    CHECK(e.detail()["key"] == "colour");
  }
  CHECK(code_of([&] { load_config(write_config(dir, "port = eighty\n"), env_of({})); }) == "INVALID_CONFIG");
  CHECK(code_of([&] { load_config(write_config(dir, "[provider.x]\nflavour = 1\n"), env_of({})); }) ==
        "INVALID_CONFIG");
  CHECK(code_of([&] { load_config(write_config(dir, "[other]\nport = 1\n"), env_of({})); }) == "INVALID_CONFIG");
  CHECK(code_of([&] { load_config(write_config(dir, "[provider.x]\nkind = magic\n"), env_of({})); }) ==
        "INVALID_CONFIG");
  CHECK(code_of([&] { load_config(dir.path() / "missing.toml", env_of({})); }) == "IO_ERROR");
  CHECK(code_of([&] { load_config(std::nullopt, env_of({{"FMEA_K_SHOTS", "-1"}})); }) == "INVALID_CONFIG");
  CliConfig bad;
  bad.embedder = "word2vec";
  CHECK(code_of([&] { make_embedder(bad); }) == "INVALID_CONFIG");
}

TEST_CASE("provider resolution adds the built-in mocks") {
  CliConfig cfg;
  cfg.lookup_map = fmea::testing::fixture_dir() / "lookup.json";
  auto providers = resolve_providers(cfg);
  REQUIRE(providers.size() == 3);
  CHECK(providers[0].provider_id == "mock_echo_shot");
  CHECK(providers[1].provider_id == "mock_lookup");
  REQUIRE(providers[1].lookup != nullptr);
  CHECK_FALSE(providers[1].lookup->empty());
  CHECK(providers[2].provider_id == "mock_noise");

  ProviderConfig remote;
  remote.provider_id = "cfgtest-remote";
  remote.kind = ProviderKind::remote_http;
  cfg.providers = {remote};
  // A remote provider without an endpoint is rejected until the env supplies one.
  CHECK(code_of([&] { resolve_providers(cfg); }) == "INVALID_CONFIG");
  ::setenv("FMEA_LLM_URL_CFGTEST_REMOTE", "http://127.0.0.1:1/x", 1);
  CHECK(resolve_providers(cfg).back().endpoint == "http://127.0.0.1:1/x");
  ::unsetenv("FMEA_LLM_URL_CFGTEST_REMOTE");

  cfg.providers = {mock_provider(ProviderKind::mock_noise)};
  CHECK(code_of([&] { resolve_providers(cfg); }) == "INVALID_CONFIG");
}
