// SPDX-License-Identifier: Apache-2.0
#include "fmea/workflow.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <future>
#include <random>

#include "fmea/error.hpp"
#include "fmea/grammar.hpp"
#include "fmea/parser.hpp"
#include "fmea/text.hpp"

namespace fmea {

namespace {

constexpr std::string_view kStatusNames[] = {"LOCKED", "READY", "CANDIDATES_SHOWN", "GENERATED", "REVIEWED"};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string random_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  return "s" + hex64(rng()).substr(4);
}

void require_open(const Session& s) {
  if (s.finalized) throw Error("SESSION_FINALIZED", "session " + s.session_id + " is finalized");
}

void require_unlocked(const Session& s, StepKind step) {
  const auto& st = s.step(step);
  if (st.status == StepStatus::LOCKED) {
    Json detail = {{"step", step_name(step)}};
    if (auto prev = previous_step(step)) detail["requires"] = step_name(*prev);
    throw Error("STEP_LOCKED", std::string(step_name(step)) + " is locked", detail);
  }
  if (st.status == StepStatus::REVIEWED)
    throw Error("STEP_REVIEWED", std::string(step_name(step)) + " is already reviewed",
                {{"step", step_name(step)}});
}

Json diag_to_json(const VariationDiagnostic& d) {
  return {{"variation", d.variation}, {"provider_id", d.provider_id}, {"shot_order", d.shot_order},
          {"shot_ids", d.shot_ids},   {"prompt_hash", d.prompt_hash}, {"status", d.status},
          {"message", d.message}};
}

std::vector<std::string> string_list(const Json& j) {
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

// Accepted then added, trimmed, blanks and case-insensitive repeats dropped.
std::vector<std::string> merge_items(const std::vector<std::string>& accepted, const std::vector<std::string>& added) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto* list : {&accepted, &added}) {
    for (const auto& raw : *list) {
      auto item = trim(raw);
      if (item.empty()) continue;
      if (seen.insert(normalize_name(item)).second) out.push_back(std::move(item));
    }
  }
  return out;
}

// "parent :: name" or just "name".
std::pair<std::optional<std::string>, std::string> split_parent(const std::string& item) {
  const auto pos = item.find("::");
  if (pos == std::string::npos) return {std::nullopt, trim(item)};
  return {trim(item.substr(0, pos)), trim(item.substr(pos + 2))};
}

template <typename T, typename NameOf>
const T& resolve_parent(const std::vector<T>& parents, const std::optional<std::string>& wanted,
                        const std::string& item, std::string_view kind, NameOf name_of) {
  if (parents.empty())
    throw Error("UNRESOLVED_REFERENCE", "no " + std::string(kind) + " to attach '" + item + "' to",
                {{"item", item}});
  if (!wanted) return parents.front();
  for (const auto& p : parents)
    if (iequals(name_of(p), *wanted)) return p;
  throw Error("UNRESOLVED_REFERENCE", "unknown " + std::string(kind) + " '" + *wanted + "'",
              {{"item", item}, {"parent", *wanted}});
}

void write_reviewed(Session& s, StepKind step, const std::vector<std::string>& items,
                    const std::optional<std::string>& description) {
  auto& d = s.draft;
  auto checked = [](const std::string& name, const std::string& item) {
    if (name.empty()) throw Error("INVALID_ITEM", "item '" + item + "' has an empty name", {{"item", item}});
    return name;
  };
  switch (step) {
    case StepKind::boundary: {
      if (!description || trim(*description).empty())
        throw Error("EMPTY_INPUT", "boundary description is empty");
      d.boundary.description = trim(*description);
      d.boundary.components = items;
      break;
    }
    case StepKind::failure_locations: {
      d.locations.clear();
      for (size_t i = 0; i < items.size(); ++i) {
        FailureLocation loc{"loc-" + std::to_string(i + 1), items[i], std::nullopt};
        for (const auto& c : d.boundary.components)
          if (iequals(c, items[i])) loc.component_ref = c;
        d.locations.push_back(std::move(loc));
      }
      break;
    }
    case StepKind::mechanisms: {
      d.mechanisms.clear();
      for (size_t i = 0; i < items.size(); ++i) {
        auto [parent, name] = split_parent(items[i]);
        const auto& loc = resolve_parent(d.locations, parent, items[i], "failure location",
                                         [](const FailureLocation& l) { return l.name; });
        d.mechanisms.push_back({"mech-" + std::to_string(i + 1), checked(name, items[i]), loc.id});
      }
      break;
    }
    case StepKind::influences: {
      d.influences.clear();
      for (size_t i = 0; i < items.size(); ++i) {
        auto [parent, name] = split_parent(items[i]);
        const auto& mech = resolve_parent(d.mechanisms, parent, items[i], "mechanism",
                                          [](const DegradationMechanism& m) { return m.name; });
        d.influences.push_back({"infl-" + std::to_string(i + 1), checked(name, items[i]), mech.id});
      }
      break;
    }
    case StepKind::tasks: {
      d.tasks.clear();
      for (size_t i = 0; i < items.size(); ++i) {
        auto [parent, name] = split_parent(items[i]);
        const auto& loc = resolve_parent(d.locations, parent, items[i], "failure location",
                                         [](const FailureLocation& l) { return l.name; });
        d.tasks.push_back({"task-" + std::to_string(i + 1), checked(name, items[i]), loc.id, std::nullopt,
                           std::nullopt});
      }
      break;
    }
    case StepKind::job_plans: {
      d.job_plans.clear();
      for (size_t i = 0; i < items.size(); ++i) {
        auto line = parse_job_plan_line(items[i]);
        if (!line)
          throw Error("INVALID_ITEM", "job plan must read 'name :: task; task :: schedule'", {{"item", items[i]}});
        JobPlan plan{"plan-" + std::to_string(i + 1), line->name, {}, line->schedule};
        for (const auto& t : line->tasks) {
          auto it = std::find_if(d.tasks.begin(), d.tasks.end(),
                                 [&](const PreventativeTask& task) { return iequals(task.description, t); });
          if (it == d.tasks.end())
            throw Error("UNRESOLVED_REFERENCE", "unknown task '" + t + "'", {{"item", items[i]}, {"task", t}});
          plan.task_refs.push_back(it->id);
        }
        d.job_plans.push_back(std::move(plan));
      }
      break;
    }
  }
}

}  // namespace

std::string_view status_name(StepStatus s) { return kStatusNames[static_cast<size_t>(s)]; }

StepStatus parse_status(std::string_view name) {
  for (size_t i = 0; i < std::size(kStatusNames); ++i)
    if (kStatusNames[i] == name) return static_cast<StepStatus>(i);
  throw Error("INVALID_ARGUMENT", "unknown step status '" + std::string(name) + "'");
}

Json to_json(const GeneratedResult& g) {
  Json variations = Json::array();
  for (const auto& d : g.variations) variations.push_back(diag_to_json(d));
  return {{"mode", mode_name(g.mode)}, {"result", to_json(g.aggregate)}, {"variations", variations}};
}

GeneratedResult generated_from_json(const Json& j) {
  GeneratedResult g;
  g.mode = parse_mode(j.at("mode").get<std::string>());
  g.aggregate = aggregate_from_json(j.at("result"));
  for (const auto& v : j.at("variations")) {
    VariationDiagnostic d;
    d.variation = v.at("variation").get<size_t>();
    d.provider_id = v.at("provider_id").get<std::string>();
    d.shot_order = v.at("shot_order").get<size_t>();
    d.shot_ids = string_list(v.at("shot_ids"));
    d.prompt_hash = v.at("prompt_hash").get<std::string>();
    d.status = v.at("status").get<std::string>();
    d.message = v.at("message").get<std::string>();
    g.variations.push_back(std::move(d));
  }
  return g;
}

Json to_json(const Session& s) {
  Json steps = Json::object();
  for (auto step : kAllSteps) {
    const auto& st = s.step(step);
    Json candidates = Json::array();
    for (const auto& c : st.candidates) candidates.push_back(to_json(c));
    steps[std::string(step_name(step))] = {
        {"status", status_name(st.status)},
        {"candidates", candidates},
        {"shots_confirmed", st.shots_confirmed},
        {"confirmed_shots", st.confirmed_shots},
        {"generated", st.generated ? to_json(*st.generated) : Json(nullptr)},
        {"accepted", st.accepted},
        {"skipped", st.skipped},
    };
  }
  return {{"session_id", s.session_id},
          {"short_description", s.short_description},
          {"created_at", s.created_at},
          {"finalized", s.finalized},
          {"doc_id", s.doc_id ? Json(*s.doc_id) : Json(nullptr)},
          {"steps", steps},
          {"draft", to_json(s.draft)}};
}

void apply_event(Session& s, const Json& e) {
  const auto type = e.at("type").get<std::string>();
  if (type == "created") {
    s = Session{};
    s.session_id = e.at("session_id").get<std::string>();
    s.short_description = e.at("short_description").get<std::string>();
    s.created_at = e.at("created_at").get<std::string>();
    if (trim(s.short_description).empty()) throw Error("EMPTY_INPUT", "short description is empty");
    s.draft.short_description = s.short_description;
    s.step(StepKind::boundary).status = StepStatus::READY;
    return;
  }
  require_open(s);
  if (type == "finalized") {
    for (const auto& name : e.at("skip")) s.step(parse_step(name.get<std::string>())).skipped = true;
    s.finalized = true;
    s.doc_id = e.at("doc_id").get<std::string>();
    s.draft.doc_id = *s.doc_id;
    s.draft.equipment_name = e.at("equipment_name").get<std::string>();
    s.draft.provenance = Provenance::generated;
    return;
  }

  const StepKind step = parse_step(e.at("step").get<std::string>());
  auto& st = s.step(step);
  require_unlocked(s, step);
  if (type == "candidates") {
    st.candidates.clear();
    for (const auto& c : e.at("candidates")) st.candidates.push_back(candidate_from_json(c));
    if (st.status == StepStatus::READY) st.status = StepStatus::CANDIDATES_SHOWN;
  } else if (type == "shots") {
    if (st.status == StepStatus::READY)
      throw Error("STEP_NOT_READY", "fetch candidates for " + std::string(step_name(step)) + " first");
    st.confirmed_shots = string_list(e.at("doc_ids"));
    st.shots_confirmed = true;
  } else if (type == "generated") {
    if (!st.shots_confirmed)
      throw Error("SHOTS_NOT_CONFIRMED", "confirm shots for " + std::string(step_name(step)) + " first");
    st.generated = generated_from_json(e.at("result"));
    st.status = StepStatus::GENERATED;
  } else if (type == "reviewed") {
    if (st.status != StepStatus::GENERATED)
      throw Error("STEP_NOT_GENERATED", std::string(step_name(step)) + " has not been generated",
                  {{"step", step_name(step)}});
    auto items = string_list(e.at("items"));
    std::optional<std::string> description;
    if (e.contains("description") && !e.at("description").is_null())
      description = e.at("description").get<std::string>();
    write_reviewed(s, step, items, description);
    st.accepted = std::move(items);
    st.status = StepStatus::REVIEWED;
    if (auto next = next_step(step)) s.step(*next).status = StepStatus::READY;
  } else {
    throw Error("INVALID_EVENT", "unknown event type '" + type + "'");
  }
}

Session replay_session(const std::vector<Json>& events) {
  if (events.empty() || events.front().value("type", "") != "created")
    throw Error("INVALID_EVENT", "event log must start with a created event");
  Session s;
  for (const auto& e : events) apply_event(s, e);
  return s;
}

Session replay_session(const std::filesystem::path& log) {
  std::vector<Json> events;
  for (const auto& line : split_lines(read_file(log))) {
    if (trim(line).empty()) continue;
    try {
      events.push_back(Json::parse(line));
    } catch (const Json::exception& ex) {
      throw Error("CORRUPT_SESSION", log.string() + ": " + ex.what());
    }
  }
  return replay_session(events);
}

// ------------------------------------------------------------------ service

WorkflowService::WorkflowService(CorpusStore& store, const Embedder& embedder, Gateway& gateway,
                                 std::vector<ProviderConfig> providers, ServiceConfig config)
    : store_(store), embedder_(embedder), gateway_(gateway), config_(std::move(config)) {
  if (providers.empty()) throw Error("INVALID_CONFIG", "at least one provider is required");
  for (auto& p : providers) {
    validate_provider(p);
    if (providers_.count(p.provider_id)) throw Error("INVALID_CONFIG", "duplicate provider '" + p.provider_id + "'");
    provider_order_.push_back(p.provider_id);
    providers_.emplace(p.provider_id, std::move(p));
  }
  for (const auto& id : config_.default_providers) provider(id);
  // The training split is fixed for the lifetime of the service so that
  // documents finalized here never leak into the example pool mid-session.
  if (store_.size() > 0) {
    split_ = store_.split_for(config_.split_seed, config_.split_ratios);
    training_.insert(split_.train_ids.begin(), split_.train_ids.end());
  }
  if (!config_.sessions_dir.empty()) {
    std::filesystem::create_directories(config_.sessions_dir);
    for (const auto& entry : std::filesystem::directory_iterator(config_.sessions_dir)) {
      if (entry.path().extension() != ".jsonl") continue;
      auto slot = std::make_shared<Slot>();
      slot->session = replay_session(entry.path());
      sessions_.emplace(slot->session.session_id, std::move(slot));
    }
  }
}

std::filesystem::path WorkflowService::log_path(const std::string& session_id) const {
  if (config_.sessions_dir.empty()) return {};
  return config_.sessions_dir / (session_id + ".jsonl");
}

std::shared_ptr<WorkflowService::Slot> WorkflowService::slot(const std::string& session_id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("NOT_FOUND", "no session '" + session_id + "'", {{"session_id", session_id}});
  return it->second;
}

void WorkflowService::commit(Slot& slot, const Json& event) {
  Session next = slot.session;
  apply_event(next, event);
  if (!config_.sessions_dir.empty()) {
    std::ofstream out(log_path(next.session_id), std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error("IO_ERROR", "cannot append to " + log_path(next.session_id).string());
  }
  slot.session = std::move(next);
}

const ProviderConfig& WorkflowService::provider(const std::string& id) const {
  auto it = providers_.find(id);
  if (it == providers_.end()) throw Error("UNKNOWN_PROVIDER", "no provider '" + id + "'", {{"provider_id", id}});
  return it->second;
}

bool WorkflowService::in_training(const std::string& doc_id) const { return training_.count(doc_id) > 0; }

std::vector<PoolEntry> WorkflowService::pool_for(StepKind step) const {
  std::vector<PoolEntry> pool;
  for (const auto& id : split_.train_ids) {
    auto doc = store_.get(id);
    try {
      format_example(doc, step);
      pool.push_back({id, retrieval_text(doc, step), doc.equipment_name + ": " + doc.short_description});
    } catch (const Error& e) {
      if (e.code() != "MISSING_STEP_DATA") throw;
    }
  }
  return pool;
}

std::string WorkflowService::create_session(const std::string& short_description) {
  if (trim(short_description).empty()) throw Error("EMPTY_INPUT", "short description is empty");
  auto slot = std::make_shared<Slot>();
  std::string id;
  {
    std::unique_lock lock(sessions_mu_);
    do {
      id = random_session_id();
    } while (sessions_.count(id));
    sessions_.emplace(id, slot);
  }
  std::lock_guard lock(slot->mu);
  try {
    commit(*slot, {{"type", "created"}, {"session_id", id}, {"short_description", short_description},
                   {"created_at", utc_now()}});
  } catch (...) {
    std::unique_lock map_lock(sessions_mu_);
    sessions_.erase(id);
    throw;
  }
  return id;
}

Session WorkflowService::get_session(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  return s->session;
}

std::vector<std::string> WorkflowService::session_ids() const {
  std::shared_lock lock(sessions_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

std::vector<ExampleCandidate> WorkflowService::get_candidates(const std::string& session_id, StepKind step,
                                                              std::optional<size_t> k) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  require_open(s->session);
  require_unlocked(s->session, step);
  const size_t want = k.value_or(config_.default_k);
  if (want < 1) throw Error("INVALID_ARGUMENT", "k must be at least 1");
  auto pool = pool_for(step);
  std::vector<ExampleCandidate> candidates;
  if (!pool.empty())
    candidates = rank_candidates(retrieval_text(s->session.draft, step), pool, want, embedder_, &store_.embeddings());
  Json list = Json::array();
  for (const auto& c : candidates) list.push_back(to_json(c));
  commit(*s, {{"type", "candidates"}, {"step", step_name(step)}, {"candidates", list}});
  return s->session.step(step).candidates;
}

void WorkflowService::confirm_shots(const std::string& session_id, StepKind step,
                                    const std::vector<std::string>& doc_ids) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  require_open(s->session);
  require_unlocked(s->session, step);
  const auto& st = s->session.step(step);
  std::set<std::string> seen;
  for (const auto& id : doc_ids) {
    const bool offered = std::any_of(st.candidates.begin(), st.candidates.end(),
                                     [&](const ExampleCandidate& c) { return c.doc_id == id; });
    if (!offered && !in_training(id))
      throw Error("UNKNOWN_EXAMPLE", "'" + id + "' is neither a candidate nor a training document", {{"doc_id", id}});
    if (!seen.insert(id).second) throw Error("DUPLICATE_SHOT", "'" + id + "' is listed twice", {{"doc_id", id}});
    try {
      format_example(store_.get(id), step);
    } catch (const Error& e) {
      throw Error("UNKNOWN_EXAMPLE", "'" + id + "' has no data for " + std::string(step_name(step)),
                  {{"doc_id", id}, {"cause", e.code()}});
    }
  }
  commit(*s, {{"type", "shots"}, {"step", step_name(step)}, {"doc_ids", doc_ids}});
}

GeneratedResult WorkflowService::generate(const std::string& session_id, StepKind step,
                                          const GenerateRequest& request) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  const Session& session = s->session;
  require_open(session);
  require_unlocked(session, step);
  const auto& st = session.step(step);
  if (!st.shots_confirmed)
    throw Error("SHOTS_NOT_CONFIRMED", "confirm shots for " + std::string(step_name(step)) + " first");

  EnsembleConfig ens;
  ens.vote_threshold = request.vote_threshold.value_or(config_.vote_threshold);
  ens.fuzzy_threshold = request.fuzzy_threshold.value_or(config_.fuzzy_threshold);
  ens.variations = request.variations;
  if (ens.variations.empty()) {
    const auto& ids = config_.default_providers.empty() ? std::vector<std::string>{provider_order_.front()}
                                                        : config_.default_providers;
    for (const auto& id : ids) ens.variations.push_back({id, 0});
  }
  validate(ens);

  std::vector<Shot> shots;
  for (const auto& id : st.confirmed_shots) shots.push_back(make_shot(store_.get(id), step));
  const auto orders = shot_orderings(shots.size());
  for (const auto& v : ens.variations) {
    provider(v.provider_id);
    if (v.shot_order >= orders.size())
      throw Error("INVALID_CONFIG", "shot_order " + std::to_string(v.shot_order) + " out of range",
                  {{"orderings", orders.size()}});
  }
  const PromptMode mode = shots.empty() ? PromptMode::zero_shot : PromptMode::dfsp;
  const std::string input = step_input(session.draft, step);

  struct Outcome {
    VariationDiagnostic diag;
    ParsedFragment fragment;
    bool ok = false;
  };
  std::vector<std::future<Outcome>> futures;
  for (size_t i = 0; i < ens.variations.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      const auto& v = ens.variations[i];
      Outcome out;
      out.fragment.step = step;
      out.diag.variation = i;
      out.diag.provider_id = v.provider_id;
      out.diag.shot_order = v.shot_order;
      std::vector<Shot> ordered;
      for (size_t idx : orders[v.shot_order]) {
        ordered.push_back(shots[idx]);
        out.diag.shot_ids.push_back(shots[idx].doc_id);
      }
      try {
        auto prompt = build_prompt(step, mode, input, std::move(ordered));
        out.diag.prompt_hash = hex64(prompt_hash(prompt.rendered));
        auto response = gateway_.complete(prompt, provider(v.provider_id));
        auto parsed = parse(response.text, step);
        if (!parsed.ok()) {
          out.diag.status = std::string(parse_error_code(parsed.error));
          out.diag.message = parsed.message;
          return out;
        }
        out.fragment = std::move(*parsed.fragment);
        out.diag.status = "ok";
        out.ok = true;
      } catch (const Error& e) {
        out.diag.status = e.code();
        out.diag.message = e.what();
      }
      return out;
    }));
  }

  GeneratedResult result;
  result.mode = mode;
  std::vector<ParsedFragment> fragments;
  bool any_ok = false;
  for (auto& f : futures) {
    auto out = f.get();
    any_ok = any_ok || out.ok;
    fragments.push_back(std::move(out.fragment));
    result.variations.push_back(std::move(out.diag));
  }
  if (!any_ok) {
    Json detail = Json::array();
    for (const auto& d : result.variations) detail.push_back(diag_to_json(d));
    throw Error("GENERATION_FAILED", "no variation produced a parseable response", {{"variations", detail}});
  }
  // Failed variations enter the vote as empty fragments, so they count
  // against every item rather than silently shrinking the electorate.
  result.aggregate = aggregate(fragments, ens);
  commit(*s, {{"type", "generated"}, {"step", step_name(step)}, {"result", to_json(result)}});
  return result;
}

void WorkflowService::review(const std::string& session_id, StepKind step, const ReviewRequest& request) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  require_open(s->session);
  require_unlocked(s->session, step);
  const auto& st = s->session.step(step);
  if (st.status != StepStatus::GENERATED)
    throw Error("STEP_NOT_GENERATED", std::string(step_name(step)) + " has not been generated",
                {{"step", step_name(step)}});
  Json event = {{"type", "reviewed"},
                {"step", step_name(step)},
                {"items", merge_items(request.accepted, request.added)},
                {"description", nullptr}};
  if (step == StepKind::boundary) {
    auto description = request.description;
    if (!description) description = st.generated->aggregate.fragment.description;
    if (description) event["description"] = *description;
  }
  commit(*s, event);
}

std::string WorkflowService::finalize(const std::string& session_id, const FinalizeRequest& request) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  const Session& session = s->session;
  require_open(session);
  std::vector<std::string> skipped;
  for (auto step : kAllSteps) {
    const auto& st = session.step(step);
    const bool skippable = step_index(step) >= step_index(StepKind::mechanisms);
    if (request.skip.count(step)) {
      if (!skippable)
        throw Error("INVALID_ARGUMENT", std::string(step_name(step)) + " cannot be skipped", {{"step", step_name(step)}});
      if (st.status == StepStatus::REVIEWED)
        throw Error("INVALID_ARGUMENT", std::string(step_name(step)) + " is reviewed and cannot be skipped",
                    {{"step", step_name(step)}});
      skipped.emplace_back(step_name(step));
      continue;
    }
    if (st.status != StepStatus::REVIEWED)
      throw Error("STEP_NOT_GENERATED", std::string(step_name(step)) + " is not reviewed", {{"step", step_name(step)}});
  }
  const std::string doc_id = "gen-" + session.session_id;
  Json event = {{"type", "finalized"},
                {"doc_id", doc_id},
                {"equipment_name", trim(request.equipment_name.value_or(session.short_description))},
                {"skip", skipped}};
  Session next = session;
  apply_event(next, event);
  auto check = validate_document(next.draft);
  if (!check.ok())
    throw Error("INVALID_DOCUMENT", "draft does not validate", {{"violations", violations_to_json(check.violations)}});
  // A crash between ingest and the log append leaves the document in the
  // store; finalizing again must succeed rather than report a duplicate.
  if (!(store_.contains(doc_id) && store_.get(doc_id) == next.draft)) store_.ingest(next.draft);
  commit(*s, event);
  return doc_id;
}

}  // namespace fmea
