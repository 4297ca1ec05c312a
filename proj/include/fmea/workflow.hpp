// SPDX-License-Identifier: Apache-2.0
//
// Supervised generation sessions. Each session walks the six steps in order;
// per step the expert fetches similar examples, confirms which ones go into
// the prompt, generates (optionally as a fuzzy-voted ensemble), and reviews
// the result before the next step unlocks.
//
// Every mutation is recorded as one JSON line in sessions/<id>.jsonl and the
// in-memory state is produced by applying that same event, so replaying a
// log reproduces the live session exactly.
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fmea/corpus.hpp"
#include "fmea/embedding.hpp"
#include "fmea/ensemble.hpp"
#include "fmea/gateway.hpp"

namespace fmea {

enum class StepStatus { LOCKED, READY, CANDIDATES_SHOWN, GENERATED, REVIEWED };

std::string_view status_name(StepStatus s);
StepStatus parse_status(std::string_view name);

struct VariationDiagnostic {
  size_t variation = 0;
  std::string provider_id;
  size_t shot_order = 0;
  std::vector<std::string> shot_ids;
  std::string prompt_hash;
  std::string status;  // "ok" or an error code
  std::string message;
};

struct GeneratedResult {
  PromptMode mode = PromptMode::zero_shot;
  AggregateResult aggregate;
  std::vector<VariationDiagnostic> variations;
};

Json to_json(const GeneratedResult& g);
GeneratedResult generated_from_json(const Json& j);

struct StepState {
  StepStatus status = StepStatus::LOCKED;
  std::vector<ExampleCandidate> candidates;
  bool shots_confirmed = false;
  std::vector<std::string> confirmed_shots;
  std::optional<GeneratedResult> generated;
  std::vector<std::string> accepted;
  bool skipped = false;
};

struct Session {
  std::string session_id;
  std::string short_description;
  std::string created_at;
  std::array<StepState, 6> steps;
  FmeaDocument draft;
  bool finalized = false;
  std::optional<std::string> doc_id;

  StepState& step(StepKind s) { return steps[step_index(s)]; }
  const StepState& step(StepKind s) const { return steps[step_index(s)]; }
};

Json to_json(const Session& s);

/// Folds one event into a session. Throws the same errors the service
/// operations report, so a rejected event never reaches the log.
void apply_event(Session& session, const Json& event);
/// Rebuilds a session from its JSON-lines event log.
Session replay_session(const std::filesystem::path& log);
Session replay_session(const std::vector<Json>& events);

struct GenerateRequest {
  std::vector<Variation> variations;  // empty: one variation per default provider
  std::optional<double> vote_threshold;
  std::optional<double> fuzzy_threshold;
};

struct ReviewRequest {
  std::vector<std::string> accepted;
  std::vector<std::string> added;
  std::optional<std::string> description;  // boundary step only
};

struct FinalizeRequest {
  std::set<StepKind> skip;
  std::optional<std::string> equipment_name;
};

struct ServiceConfig {
  std::filesystem::path sessions_dir;  // empty: sessions live in memory
  std::uint64_t split_seed = 7;
  SplitRatios split_ratios;
  size_t default_k = 3;
  double vote_threshold = 0.5;
  double fuzzy_threshold = 0.85;
  std::vector<std::string> default_providers;  // empty: first registered provider
};

class WorkflowService {
 public:
  WorkflowService(CorpusStore& store, const Embedder& embedder, Gateway& gateway,
                  std::vector<ProviderConfig> providers, ServiceConfig config = {});

  /// Throws EMPTY_INPUT.
  std::string create_session(const std::string& short_description);
  /// Throws NOT_FOUND.
  Session get_session(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

  /// Throws STEP_LOCKED, STEP_REVIEWED, NOT_FOUND.
  std::vector<ExampleCandidate> get_candidates(const std::string& session_id, StepKind step,
                                               std::optional<size_t> k = std::nullopt);
  /// Throws UNKNOWN_EXAMPLE, STEP_LOCKED, STEP_NOT_READY.
  void confirm_shots(const std::string& session_id, StepKind step, const std::vector<std::string>& doc_ids);
  /// Throws SHOTS_NOT_CONFIRMED, STEP_LOCKED, UNKNOWN_PROVIDER, GENERATION_FAILED.
  GeneratedResult generate(const std::string& session_id, StepKind step, const GenerateRequest& request);
  /// Throws STEP_NOT_GENERATED, UNRESOLVED_REFERENCE, INVALID_ITEM, EMPTY_INPUT.
  void review(const std::string& session_id, StepKind step, const ReviewRequest& request);
  /// Throws STEP_NOT_GENERATED, INVALID_DOCUMENT. Returns the ingested doc id.
  std::string finalize(const std::string& session_id, const FinalizeRequest& request);

  const CorpusStore& store() const { return store_; }
  const CorpusSplit& split() const { return split_; }
  const ServiceConfig& config() const { return config_; }
  std::filesystem::path log_path(const std::string& session_id) const;

 private:
  struct Slot {
    std::mutex mu;
    Session session;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  /// Applies to a copy, appends to the log, then publishes.
  void commit(Slot& slot, const Json& event);
  std::vector<PoolEntry> pool_for(StepKind step) const;
  const ProviderConfig& provider(const std::string& id) const;
  bool in_training(const std::string& doc_id) const;

  CorpusStore& store_;
  const Embedder& embedder_;
  Gateway& gateway_;
  std::map<std::string, ProviderConfig> providers_;
  std::vector<std::string> provider_order_;
  ServiceConfig config_;
  CorpusSplit split_;
  std::set<std::string> training_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

// ------------------------------------------------------------------ HTTP

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// HTTP status for an error code.
int status_for(const std::string& code);

/// Routes the JSON API onto a WorkflowService without any socket, so the
/// HTTP server and in-process tests share one code path.
///
///   POST /sessions                                  {"short_description"}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/steps/{step}/candidates?k=
///   PUT  /sessions/{id}/steps/{step}/shots          {"doc_ids": [...]}
///   POST /sessions/{id}/steps/{step}/generate       {"variations"|"providers", thresholds}
///   POST /sessions/{id}/steps/{step}/review         {"accepted", "added", "description"}
///   POST /sessions/{id}/finalize                    {"skip", "equipment_name"}
///   GET  /documents?provenance=&split=
///   GET  /documents/{id}
///
/// Errors: {"code", "message", "detail"}.
ApiResponse handle_request(WorkflowService& service, const ApiRequest& request);

struct ServeOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path ui_dir;  // served at /ui/ when present
};

/// Blocks serving the API until the process is stopped.
void serve(WorkflowService& service, const ServeOptions& options);

}  // namespace fmea
