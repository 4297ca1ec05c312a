// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fmea/workflow.hpp"

#include <regex>
#include <set>

#include "fmea/error.hpp"
#include "fmea/fixtures.hpp"
#include "fmea/grammar.hpp"
#include "fmea/prompt.hpp"
#include "helpers.hpp"

using namespace fmea;
using fmea::testing::TempDir;

namespace {

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error("NONE", "");
}

struct Harness {
  FixtureSet fixtures = load_fixtures(fmea::testing::fixture_dir());
  CorpusStore store;
  HashEmbedder embedder;
  Gateway gateway;
  std::unique_ptr<WorkflowService> service;

  explicit Harness(ServiceConfig cfg = {}, size_t n_docs = 20) {
    for (size_t i = 0; i < n_docs; ++i) store.ingest(fixtures.documents[i]);
    service = std::make_unique<WorkflowService>(store, embedder, gateway, providers(), std::move(cfg));
  }
  std::vector<ProviderConfig> providers() const {
    return {mock_provider(ProviderKind::mock_echo_shot),
            mock_provider(ProviderKind::mock_lookup, std::make_shared<LookupMap>(fixtures.lookup)),
            mock_provider(ProviderKind::mock_noise)};
  }
  const std::string& train(size_t i) const { return service->split().train_ids.at(i); }
  FmeaDocument doc(const std::string& id) const { return store.get(id); }

  GeneratedResult run(const std::string& sid, StepKind step, const std::vector<std::string>& shots,
                      GenerateRequest req = {}) {
    service->get_candidates(sid, step);
    service->confirm_shots(sid, step, shots);
    return service->generate(sid, step, req);
  }
  // Echo every step from one training document and accept everything.
  void accept_all(const std::string& sid, const std::string& shot, StepKind last = StepKind::job_plans) {
    for (auto step : kAllSteps) {
      auto g = run(sid, step, {shot});
      service->review(sid, step, {g.aggregate.fragment.items, {}, std::nullopt});
      if (step == last) break;
    }
  }
};

StepStatus status(const Harness& h, const std::string& sid, StepKind step) {
  return h.service->get_session(sid).step(step).status;
}

}  // namespace

TEST_CASE("a new session starts with only the boundary step ready") {
  Harness h;
  auto sid = h.service->create_session("Horizontal pump for cooling water");
  auto s = h.service->get_session(sid);
  CHECK(std::regex_match(sid, std::regex("s[0-9a-f]{12}")));
  CHECK(s.short_description == "Horizontal pump for cooling water");
  CHECK(s.draft.short_description == s.short_description);
  CHECK(std::regex_match(s.created_at, std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
  CHECK(s.step(StepKind::boundary).status == StepStatus::READY);
  for (auto step : kAllSteps)
    if (step != StepKind::boundary) CHECK(s.step(step).status == StepStatus::LOCKED);
  CHECK_FALSE(s.finalized);
  CHECK(code_of([&] { h.service->create_session("   "); }) == "EMPTY_INPUT");
  CHECK(code_of([&] { h.service->get_session("s000000000000"); }) == "NOT_FOUND");
  std::set<std::string> ids{sid};
  for (int i = 0; i < 50; ++i) CHECK(ids.insert(h.service->create_session("pump")).second);
}

TEST_CASE("candidates: identical description scores 1 and k is capped by the pool") {
  Harness h;
  const auto target = h.doc(h.train(3));
  auto sid = h.service->create_session(target.short_description);
  auto c = h.service->get_candidates(sid, StepKind::boundary, 3);
  REQUIRE(c.size() == 3);
  CHECK(c[0].doc_id == target.doc_id);
  CHECK(std::abs(*c[0].score - 1.0) < 1e-9);
  CHECK(c[0].preview == target.equipment_name + ": " + target.short_description);
  CHECK(*c[0].score >= *c[1].score);
  CHECK(status(h, sid, StepKind::boundary) == StepStatus::CANDIDATES_SHOWN);
  CHECK(code_of([&] { h.service->get_candidates(sid, StepKind::boundary, 0); }) == "INVALID_ARGUMENT");

  Harness small({}, 3);
  REQUIRE(small.service->split().train_ids.size() == 2);
  auto sid2 = small.service->create_session("centrifugal pump");
  CHECK(small.service->get_candidates(sid2, StepKind::boundary, 3).size() == 2);
}

TEST_CASE("step gating") {
  Harness h;
  auto sid = h.service->create_session("pump");
  auto e = error_of([&] { h.service->get_candidates(sid, StepKind::failure_locations); });
  CHECK(e.code() == "STEP_LOCKED");
  CHECK(e.detail()["requires"] == "boundary");
  CHECK(code_of([&] { h.service->confirm_shots(sid, StepKind::boundary, {}); }) == "STEP_NOT_READY");
  h.service->get_candidates(sid, StepKind::boundary);
  CHECK(code_of([&] { h.service->generate(sid, StepKind::boundary, {}); }) == "SHOTS_NOT_CONFIRMED");
  CHECK(code_of([&] { h.service->review(sid, StepKind::boundary, {}); }) == "STEP_NOT_GENERATED");
  CHECK(code_of([&] { h.service->generate(sid, StepKind::mechanisms, {}); }) == "STEP_LOCKED");
}

TEST_CASE("shot confirmation rules") {
  Harness h;
  auto sid = h.service->create_session("pump");
  auto c = h.service->get_candidates(sid, StepKind::boundary, 2);
  CHECK(code_of([&] { h.service->confirm_shots(sid, StepKind::boundary, {"no-such-doc"}); }) == "UNKNOWN_EXAMPLE");
  const auto test_doc = h.service->split().test_ids.front();
  CHECK(code_of([&] { h.service->confirm_shots(sid, StepKind::boundary, {test_doc}); }) == "UNKNOWN_EXAMPLE");
  CHECK(code_of([&] { h.service->confirm_shots(sid, StepKind::boundary, {c[0].doc_id, c[0].doc_id}); }) ==
        "DUPLICATE_SHOT");
  // Any training document may be chosen, not only the offered ones.
  CHECK_NOTHROW(h.service->confirm_shots(sid, StepKind::boundary, {h.train(10)}));
  CHECK(h.service->get_session(sid).step(StepKind::boundary).confirmed_shots == std::vector<std::string>{h.train(10)});
}

TEST_CASE("an empty shot list generates zero-shot") {
  Harness h;
  const auto target = h.doc(h.service->split().test_ids.front());
  auto sid = h.service->create_session(target.short_description);
  GenerateRequest req;
  req.variations = {{"mock_lookup", 0}};
  auto g = h.run(sid, StepKind::boundary, {}, req);
  CHECK(g.mode == PromptMode::zero_shot);
  CHECK(g.aggregate.fragment.items == target.boundary.components);
  CHECK(g.variations[0].shot_ids.empty());
  CHECK(status(h, sid, StepKind::boundary) == StepStatus::GENERATED);
}

TEST_CASE("confirmed shot order reaches the prompt") {
  Harness h;
  auto sid = h.service->create_session("pump");
  const auto a = h.train(0), b = h.train(1);
  auto g = h.run(sid, StepKind::boundary, {b, a});
  CHECK(g.mode == PromptMode::dfsp);
  CHECK(g.variations[0].shot_ids == std::vector<std::string>{b, a});
  CHECK(g.aggregate.fragment.items == h.doc(b).boundary.components);
  CHECK(g.aggregate.fragment.description == h.doc(b).boundary.description);
  // Ordering 1 of two shots is [1, 0], so the echo now returns a.
  GenerateRequest swapped;
  swapped.variations = {{"mock_echo_shot", 1}};
  auto g2 = h.service->generate(sid, StepKind::boundary, swapped);
  CHECK(g2.variations[0].shot_ids == std::vector<std::string>{a, b});
  CHECK(g2.aggregate.fragment.items == h.doc(a).boundary.components);
  swapped.variations = {{"mock_echo_shot", 2}};
  CHECK(code_of([&] { h.service->generate(sid, StepKind::boundary, swapped); }) == "INVALID_CONFIG");
  swapped.variations = {{"gpt-9", 0}};
  CHECK(code_of([&] { h.service->generate(sid, StepKind::boundary, swapped); }) == "UNKNOWN_PROVIDER");
}

TEST_CASE("unparseable output fails generation with diagnostics and leaves state alone") {
  Harness h;
  auto sid = h.service->create_session("pump");
  h.service->get_candidates(sid, StepKind::boundary);
  h.service->confirm_shots(sid, StepKind::boundary, {h.train(0)});
  GenerateRequest req;
  req.variations = {{"mock_noise", 0}, {"mock_noise", 0}};
  auto e = error_of([&] { h.service->generate(sid, StepKind::boundary, req); });
  CHECK(e.code() == "GENERATION_FAILED");
  REQUIRE(e.detail()["variations"].size() == 2);
  CHECK(e.detail()["variations"][0]["status"] == "NO_RECOGNIZED_BLOCK");
  CHECK(e.detail()["variations"][0]["prompt_hash"].get<std::string>().size() == 16);
  CHECK(status(h, sid, StepKind::boundary) == StepStatus::CANDIDATES_SHOWN);

  // One good variation is enough; failed ones vote as empty.
  req.variations = {{"mock_echo_shot", 0}, {"mock_noise", 0}};
  req.vote_threshold = 0.5;
  auto g = h.service->generate(sid, StepKind::boundary, req);
  CHECK(g.variations[1].status == "NO_RECOGNIZED_BLOCK");
  CHECK(g.aggregate.fragment.items == h.doc(h.train(0)).boundary.components);
  req.vote_threshold = 1.0;
  CHECK(h.service->generate(sid, StepKind::boundary, req).aggregate.fragment.items.empty());
}

TEST_CASE("identical variations agree with a single run") {
  Harness h;
  auto sid = h.service->create_session("pump");
  auto single = h.run(sid, StepKind::boundary, {h.train(2), h.train(5)});
  GenerateRequest triple;
  triple.variations = {{"mock_echo_shot", 0}, {"mock_echo_shot", 0}, {"mock_echo_shot", 0}};
  for (double vote : {0.34, 0.5, 1.0}) {
    triple.vote_threshold = vote;
    auto g = h.service->generate(sid, StepKind::boundary, triple);
    CHECK(g.aggregate.fragment.items == single.aggregate.fragment.items);
    CHECK(g.aggregate.fragment.description == single.aggregate.fragment.description);
  }
}

TEST_CASE("accept-all through every step then finalize") {
  Harness h;
  const auto shot = h.train(4);
  const auto src = h.doc(shot);
  auto sid = h.service->create_session("new pump installation");
  h.accept_all(sid, shot);
  auto s = h.service->get_session(sid);
  for (auto step : kAllSteps) CHECK(s.step(step).status == StepStatus::REVIEWED);
  CHECK(s.draft.boundary == src.boundary);
  CHECK(flatten_step_items(s.draft, StepKind::job_plans) == flatten_step_items(src, StepKind::job_plans));
  CHECK(code_of([&] { h.service->get_candidates(sid, StepKind::boundary); }) == "STEP_REVIEWED");

  const auto before = h.store.size();
  auto doc_id = h.service->finalize(sid, {{}, std::string("Pump P-101")});
  CHECK(doc_id == "gen-" + sid);
  CHECK(h.store.size() == before + 1);
  auto stored = h.store.get(doc_id);
  CHECK(stored.provenance == Provenance::generated);
  CHECK(stored.equipment_name == "Pump P-101");
  CHECK(stored.short_description == "new pump installation");
  CHECK(validate_document(stored).ok());
  for (auto step : kAllSteps) CHECK(block_items(stored, step).size() == block_items(src, step).size());
  CHECK(h.service->get_session(sid).finalized);
  CHECK(code_of([&] { h.service->finalize(sid, {}); }) == "SESSION_FINALIZED");
  CHECK(code_of([&] { h.service->get_candidates(sid, StepKind::tasks); }) == "SESSION_FINALIZED");
  // The training split does not change under the running service.
  CHECK(std::count(h.service->split().train_ids.begin(), h.service->split().train_ids.end(), doc_id) == 0);
}

TEST_CASE("finalize rules for unfinished steps") {
  Harness h;
  auto sid = h.service->create_session("fan");
  CHECK(code_of([&] { h.service->finalize(sid, {}); }) == "STEP_NOT_GENERATED");
  h.accept_all(sid, h.train(0), StepKind::failure_locations);
  CHECK(code_of([&] { h.service->finalize(sid, {}); }) == "STEP_NOT_GENERATED");
  CHECK(code_of([&] { h.service->finalize(sid, {{StepKind::failure_locations}, {}}); }) == "INVALID_ARGUMENT");
  FinalizeRequest skip_rest{{StepKind::mechanisms, StepKind::influences, StepKind::tasks, StepKind::job_plans}, {}};
  auto doc_id = h.service->finalize(sid, skip_rest);
  auto d = h.store.get(doc_id);
  CHECK(d.mechanisms.empty());
  CHECK(d.job_plans.empty());
  CHECK(d.equipment_name == "fan");
  CHECK(h.service->get_session(sid).step(StepKind::tasks).skipped);
}

TEST_CASE("review edits: supplements, parents and validation") {
  Harness h;
  const auto shot = h.train(1);
  auto sid = h.service->create_session("pump");
  h.accept_all(sid, shot, StepKind::boundary);

  auto g = h.run(sid, StepKind::failure_locations, {shot});
  const auto first = g.aggregate.fragment.items.front();
  h.service->review(sid, StepKind::failure_locations, {{first}, {"  Extra coupling ", "extra COUPLING", " "}, {}});
  auto s = h.service->get_session(sid);
  REQUIRE(s.draft.locations.size() == 2);
  CHECK(s.draft.locations[1].name == "Extra coupling");
  CHECK(s.step(StepKind::failure_locations).accepted == std::vector<std::string>{first, "Extra coupling"});

  h.run(sid, StepKind::mechanisms, {shot});
  CHECK(code_of([&] {
          h.service->review(sid, StepKind::mechanisms, {{}, {"Gearbox :: Pitting"}, {}});
        }) == "UNRESOLVED_REFERENCE");
  CHECK(code_of([&] { h.service->review(sid, StepKind::mechanisms, {{}, {"extra coupling :: "}, {}}); }) ==
        "INVALID_ITEM");
  h.service->review(sid, StepKind::mechanisms, {{"Wear"}, {"extra coupling :: Misalignment"}, {}});
  s = h.service->get_session(sid);
  CHECK(s.draft.mechanisms[0].location_ref == "loc-1");
  CHECK(s.draft.mechanisms[1].location_ref == "loc-2");
  CHECK(s.draft.mechanisms[1].name == "Misalignment");
  CHECK(status(h, sid, StepKind::influences) == StepStatus::READY);
}

TEST_CASE("boundary review needs a description") {
  Harness h;
  auto sid = h.service->create_session("pump");
  h.run(sid, StepKind::boundary, {h.train(0)});
  CHECK(code_of([&] { h.service->review(sid, StepKind::boundary, {{"Casing"}, {}, std::string("  ")}); }) ==
        "EMPTY_INPUT");
  h.service->review(sid, StepKind::boundary, {{"Casing"}, {"Rotor"}, std::string("Edited purpose")});
  auto s = h.service->get_session(sid);
  CHECK(s.draft.boundary.description == "Edited purpose");
  CHECK(s.draft.boundary.components == std::vector<std::string>{"Casing", "Rotor"});
}

TEST_CASE("event logs replay to the identical session") {
  TempDir dir("sessions");
  ServiceConfig cfg;
  cfg.sessions_dir = dir.path();
  std::string done, partial;
  Json done_json, partial_json;
  {
    Harness h(cfg);
    done = h.service->create_session("pump for cooling water");
    h.accept_all(done, h.train(2));
    h.service->finalize(done, {});
    partial = h.service->create_session("axial fan");
    h.accept_all(partial, h.train(7), StepKind::mechanisms);
    h.run(partial, StepKind::influences, {h.train(7)});
    // A rejected operation leaves no trace in the log.
    CHECK(code_of([&] { h.service->review(partial, StepKind::tasks, {}); }) == "STEP_LOCKED");
    done_json = to_json(h.service->get_session(done));
    partial_json = to_json(h.service->get_session(partial));
    CHECK(to_json(replay_session(h.service->log_path(done))).dump() == done_json.dump());
    CHECK(to_json(replay_session(h.service->log_path(partial))).dump() == partial_json.dump());
  }
  CorpusStore fresh;
  for (const auto& d : load_fixtures(fmea::testing::fixture_dir()).documents) fresh.ingest(d);
  HashEmbedder embedder;
  Gateway gateway;
  WorkflowService reopened(fresh, embedder, gateway, {mock_provider(ProviderKind::mock_echo_shot)}, cfg);
  CHECK(reopened.session_ids().size() == 2);
  CHECK(to_json(reopened.get_session(partial)).dump() == partial_json.dump());
  CHECK(to_json(reopened.get_session(done)).dump() == done_json.dump());
  CHECK(code_of([] { replay_session(std::vector<Json>{}); }) == "INVALID_EVENT");
}

TEST_CASE("service construction errors") {
  CorpusStore store;
  HashEmbedder embedder;
  Gateway gateway;
  CHECK(code_of([&] { WorkflowService(store, embedder, gateway, {}); }) == "INVALID_CONFIG");
  auto echo = mock_provider(ProviderKind::mock_echo_shot);
  CHECK(code_of([&] { WorkflowService(store, embedder, gateway, {echo, echo}); }) == "INVALID_CONFIG");
  ServiceConfig cfg;
  cfg.default_providers = {"missing"};
  CHECK(code_of([&] { WorkflowService(store, embedder, gateway, {echo}, cfg); }) == "UNKNOWN_PROVIDER");
}

TEST_CASE("HTTP routing") {
  Harness h;
  auto call = [&](std::string method, std::string path, Json body = nullptr,
                  std::map<std::string, std::string> query = {}) {
    return handle_request(*h.service, {std::move(method), std::move(path), std::move(query),
                                       body.is_null() ? "" : body.dump()});
  };
  auto created = call("POST", "/sessions", {{"short_description", "centrifugal pump"}});
  REQUIRE(created.status == 201);
  const auto sid = created.body["session_id"].get<std::string>();
  CHECK(created.body["steps"]["boundary"]["status"] == "READY");
  CHECK(call("GET", "/sessions/" + sid).body == created.body);

  auto cands = call("GET", "/sessions/" + sid + "/steps/boundary/candidates", nullptr, {{"k", "2"}});
  CHECK(cands.status == 200);
  CHECK(cands.body["candidates"].size() == 2);
  const auto first = cands.body["candidates"][0]["doc_id"].get<std::string>();
  CHECK(call("PUT", "/sessions/" + sid + "/steps/boundary/shots", {{"doc_ids", {first}}}).status == 200);
  auto gen = call("POST", "/sessions/" + sid + "/steps/boundary/generate",
                  {{"variations", {{{"provider_id", "mock_echo_shot"}, {"shot_order", 0}}}}, {"vote_threshold", 0.5}});
  REQUIRE(gen.status == 200);
  CHECK(gen.body["generated"]["mode"] == "dfsp");
  auto items = gen.body["generated"]["result"]["items"];
  auto reviewed = call("POST", "/sessions/" + sid + "/steps/boundary/review", {{"accepted", items}});
  CHECK(reviewed.status == 200);
  CHECK(reviewed.body["steps"]["failure_locations"]["status"] == "READY");

  // Error mapping.
  auto locked = call("GET", "/sessions/" + sid + "/steps/tasks/candidates");
  CHECK(locked.status == 409);
  CHECK(locked.body["code"] == "STEP_LOCKED");
  CHECK(locked.body.contains("message"));
  CHECK(locked.body["detail"]["requires"] == "influences");
  CHECK(call("GET", "/sessions/nope").status == 404);
  CHECK(call("POST", "/sessions", {{"short_description", " "}}).status == 400);
  CHECK(handle_request(*h.service, {"POST", "/sessions", {}, "{oops"}).body["code"] == "INVALID_JSON");
  CHECK(call("DELETE", "/sessions/" + sid).status == 405);
  CHECK(call("GET", "/elsewhere").status == 404);
  CHECK(call("GET", "/sessions/" + sid + "/steps/bogus/candidates").body["code"] == "UNKNOWN_STEP");
  CHECK(call("GET", "/sessions/" + sid + "/steps/failure_locations/candidates", nullptr, {{"k", "x"}}).status ==
        400);
  CHECK(call("PUT", "/sessions/" + sid + "/steps/failure_locations/shots", Json::object()).status == 400);
  call("GET", "/sessions/" + sid + "/steps/failure_locations/candidates");
  CHECK(call("PUT", "/sessions/" + sid + "/steps/failure_locations/shots", {{"doc_ids", {"zzz"}}}).status == 422);
  CHECK(call("PUT", "/sessions/" + sid + "/steps/failure_locations/shots", {{"doc_ids", Json::array()}}).status == 200);
  auto failed = call("POST", "/sessions/" + sid + "/steps/failure_locations/generate", {{"providers", {"mock_noise"}}});
  CHECK(failed.status == 502);
  CHECK(failed.body["detail"]["variations"].size() == 1);
  CHECK(call("POST", "/sessions/" + sid + "/finalize").status == 409);

  auto docs = call("GET", "/documents", nullptr, {{"split", "train"}});
  CHECK(docs.body["documents"].size() == h.service->split().train_ids.size());
  CHECK(call("GET", "/documents", nullptr, {{"provenance", "fixture"}}).body["documents"].size() == 20);
  CHECK(call("GET", "/documents", nullptr, {{"provenance", "bogus"}}).status == 400);
  CHECK(call("GET", "/documents/" + first).body["doc_id"] == first);
  CHECK(call("GET", "/documents/missing").status == 404);
  CHECK(status_for("PROVIDER_TIMEOUT") == 502);
  CHECK(status_for("SOMETHING_NEW") == 500);
}
