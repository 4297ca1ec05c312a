// SPDX-License-Identifier: Apache-2.0
#include <charconv>

#include "fmea/error.hpp"
#include "fmea/text.hpp"
#include "fmea/workflow.hpp"

namespace fmea {

namespace {

Json parse_body(const std::string& body) {
  if (trim(body).empty()) return Json::object();
  try {
    auto j = Json::parse(body);
    if (!j.is_object()) throw Error("INVALID_JSON", "request body must be a JSON object");
    return j;
  } catch (const Json::exception& e) {
    throw Error("INVALID_JSON", std::string("malformed request body: ") + e.what());
  }
}

// Typed field access that reports a 400 instead of a library exception.
template <typename T>
std::optional<T> field(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  try {
    return body.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error("INVALID_ARGUMENT", std::string("field '") + key + "' has the wrong type", {{"field", key}});
  }
}

size_t parse_k(const std::string& text) {
  size_t k = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error("INVALID_ARGUMENT", "k must be a positive integer", {{"k", text}});
  return k;
}

Json document_summary(const FmeaDocument& d) {
  return {{"doc_id", d.doc_id},
          {"equipment_name", d.equipment_name},
          {"short_description", d.short_description},
          {"provenance", provenance_name(d.provenance)}};
}

ApiResponse route(WorkflowService& service, const ApiRequest& req) {
  auto parts = split(req.path, "/");
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  const auto& m = req.method;
  const auto n = parts.size();

  auto method_not_allowed = [&]() -> ApiResponse {
    throw Error("METHOD_NOT_ALLOWED", m + " not allowed on " + req.path);
  };

  if (n >= 1 && parts[0] == "sessions") {
    if (n == 1) {
      if (m != "POST") return method_not_allowed();
      auto body = parse_body(req.body);
      auto id = service.create_session(field<std::string>(body, "short_description").value_or(""));
      return {201, to_json(service.get_session(id))};
    }
    const auto& id = parts[1];
    if (n == 2) {
      if (m != "GET") return method_not_allowed();
      return {200, to_json(service.get_session(id))};
    }
    if (n == 3 && parts[2] == "finalize") {
      if (m != "POST") return method_not_allowed();
      auto body = parse_body(req.body);
      FinalizeRequest fr;
      for (const auto& s : field<std::vector<std::string>>(body, "skip").value_or(std::vector<std::string>{}))
        fr.skip.insert(parse_step(s));
      fr.equipment_name = field<std::string>(body, "equipment_name");
      auto doc_id = service.finalize(id, fr);
      return {200, {{"doc_id", doc_id}, {"session", to_json(service.get_session(id))}}};
    }
    if (n == 5 && parts[2] == "steps") {
      const StepKind step = parse_step(parts[3]);
      const auto& action = parts[4];
      if (action == "candidates") {
        if (m != "GET") return method_not_allowed();
        std::optional<size_t> k;
        if (auto it = req.query.find("k"); it != req.query.end()) k = parse_k(it->second);
        Json list = Json::array();
        for (const auto& c : service.get_candidates(id, step, k)) list.push_back(to_json(c));
        return {200, {{"step", step_name(step)}, {"candidates", list}}};
      }
      if (action == "shots") {
        if (m != "PUT") return method_not_allowed();
        auto body = parse_body(req.body);
        auto ids = field<std::vector<std::string>>(body, "doc_ids");
        if (!ids) throw Error("INVALID_ARGUMENT", "doc_ids is required", {{"field", "doc_ids"}});
        service.confirm_shots(id, step, *ids);
        return {200, to_json(service.get_session(id))};
      }
      if (action == "generate") {
        if (m != "POST") return method_not_allowed();
        auto body = parse_body(req.body);
        GenerateRequest gr;
        if (body.contains("variations")) {
          if (!body.at("variations").is_array())
            throw Error("INVALID_ARGUMENT", "variations must be a list", {{"field", "variations"}});
          for (const auto& v : body.at("variations")) {
            auto pid = field<std::string>(v, "provider_id");
            if (!pid) throw Error("INVALID_ARGUMENT", "variation needs provider_id", {{"field", "variations"}});
            gr.variations.push_back({*pid, field<size_t>(v, "shot_order").value_or(0)});
          }
        }
        for (const auto& p : field<std::vector<std::string>>(body, "providers").value_or(std::vector<std::string>{}))
          gr.variations.push_back({p, 0});
        gr.vote_threshold = field<double>(body, "vote_threshold");
        gr.fuzzy_threshold = field<double>(body, "fuzzy_threshold");
        auto result = service.generate(id, step, gr);
        return {200, {{"step", step_name(step)}, {"generated", to_json(result)}}};
      }
      if (action == "review") {
        if (m != "POST") return method_not_allowed();
        auto body = parse_body(req.body);
        ReviewRequest rr;
        rr.accepted = field<std::vector<std::string>>(body, "accepted").value_or(std::vector<std::string>{});
        rr.added = field<std::vector<std::string>>(body, "added").value_or(std::vector<std::string>{});
        rr.description = field<std::string>(body, "description");
        service.review(id, step, rr);
        return {200, to_json(service.get_session(id))};
      }
    }
  }

  if (n >= 1 && parts[0] == "documents") {
    if (m != "GET") return method_not_allowed();
    const auto& store = service.store();
    if (n == 1) {
      std::vector<std::string> ids;
      if (auto it = req.query.find("split"); it != req.query.end()) {
        ids = store.list(service.split(), parse_split_part(it->second));
      } else if (auto pit = req.query.find("provenance"); pit != req.query.end()) {
        try {
          ids = store.list(parse_provenance(pit->second));
        } catch (const Error& e) {
          throw Error("INVALID_ARGUMENT", e.what(), {{"provenance", pit->second}});
        }
      } else {
        ids = store.list();
      }
      Json docs = Json::array();
      for (const auto& id : ids) docs.push_back(document_summary(store.get(id)));
      return {200, {{"documents", docs}}};
    }
    if (n == 2) return {200, to_json(store.get(parts[1]))};
  }

  throw Error("ROUTE_NOT_FOUND", "no route for " + m + " " + req.path);
}

}  // namespace

int status_for(const std::string& code) {
  static const std::map<std::string, int, std::less<>> table = {
      {"EMPTY_INPUT", 400},          {"INVALID_ARGUMENT", 400},     {"INVALID_JSON", 400},
      {"UNKNOWN_STEP", 400},         {"UNKNOWN_PROVIDER", 400},     {"INVALID_CONFIG", 400},
      {"INVALID_ITEM", 400},         {"DUPLICATE_SHOT", 400},       {"NOT_FOUND", 404},
      {"ROUTE_NOT_FOUND", 404},      {"METHOD_NOT_ALLOWED", 405},   {"STEP_LOCKED", 409},
      {"STEP_REVIEWED", 409},        {"STEP_NOT_READY", 409},       {"STEP_NOT_GENERATED", 409},
      {"SHOTS_NOT_CONFIRMED", 409},  {"SESSION_FINALIZED", 409},    {"DUPLICATE_ID", 409},
      {"UNKNOWN_EXAMPLE", 422},      {"INVALID_DOCUMENT", 422},     {"UNRESOLVED_REFERENCE", 422},
      {"MISSING_STEP_DATA", 422},    {"GENERATION_FAILED", 502},    {"PROVIDER_TIMEOUT", 502},
      {"PROVIDER_HTTP_ERROR", 502},  {"PROVIDER_UNAVAILABLE", 502},
  };
  auto it = table.find(code);
  return it == table.end() ? 500 : it->second;
}

ApiResponse handle_request(WorkflowService& service, const ApiRequest& request) {
  try {
    return route(service, request);
  } catch (const Error& e) {
    return {status_for(e.code()), {{"code", e.code()}, {"message", e.what()}, {"detail", e.detail()}}};
  } catch (const std::exception& e) {
    return {500, {{"code", "INTERNAL"}, {"message", e.what()}, {"detail", nullptr}}};
  }
}

}  // namespace fmea
