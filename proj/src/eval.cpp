// SPDX-License-Identifier: Apache-2.0
#include "fmea/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "fmea/ensemble.hpp"
#include "fmea/error.hpp"
#include "fmea/parser.hpp"
#include "fmea/text.hpp"

namespace fmea {

namespace {
double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }
}  // namespace

Rouge1Score rouge1(std::string_view candidate, std::string_view reference) {
  auto ref = tokenize(reference);
  if (ref.empty()) throw Error("EMPTY_REFERENCE", "ROUGE-1 reference has no tokens");
  auto cand = tokenize(candidate);
  std::map<std::string, size_t> ref_counts, cand_counts;
  for (const auto& t : ref) ++ref_counts[t];
  for (const auto& t : cand) ++cand_counts[t];
  size_t overlap = 0;
  for (const auto& [tok, n] : cand_counts) {
    auto it = ref_counts.find(tok);
    if (it != ref_counts.end()) overlap += std::min(n, it->second);
  }
  Rouge1Score s;
  s.recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  s.precision = cand.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(cand.size());
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

double match_score(std::string_view predicted, std::string_view gold) {
  if (normalize_name(predicted) == normalize_name(gold)) return 1.0;
  if (trim(predicted).empty() || trim(gold).empty()) return 0.0;
  return std::min(similarity(predicted, gold), std::nextafter(1.0, 0.0));
}

SetMetrics set_metrics(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
                       double fuzzy_threshold) {
  if (gold.empty()) throw Error("EMPTY_GOLD", "gold list is empty");
  SetMetrics m;
  if (predicted.empty()) return m;
  std::vector<bool> taken(gold.size(), false);
  std::vector<std::string> gold_norm;
  for (const auto& g : gold) gold_norm.push_back(normalize_name(g));
  // Below an exact match the score is < 1, so a threshold of 1 never needs
  // the token similarity.
  const bool exact_only = fuzzy_threshold >= 1.0;
  for (const auto& p : predicted) {
    const auto p_norm = normalize_name(p);
    double best = -1;
    size_t best_idx = gold.size();
    for (size_t g = 0; g < gold.size(); ++g) {
      if (taken[g]) continue;
      double s = p_norm == gold_norm[g] ? 1.0 : exact_only ? 0.0 : match_score(p, gold[g]);
      if (s >= fuzzy_threshold && s > best) {
        best = s;
        best_idx = g;
      }
    }
    if (best_idx < gold.size()) {
      taken[best_idx] = true;
      m.matched_pairs.emplace_back(p, gold[best_idx]);
    }
  }
  const auto matches = static_cast<double>(m.matched_pairs.size());
  m.recall = matches / static_cast<double>(gold.size());
  m.precision = matches / static_cast<double>(predicted.size());
  m.f1 = harmonic(m.precision, m.recall);
  return m;
}

std::vector<std::string> metric_names(StepKind step) {
  if (step == StepKind::boundary)
    return {"rouge1", "rouge1_precision", "rouge1_f1", "recall", "precision", "f1"};
  return {"recall", "precision", "f1"};
}

double ReportRow::mean(std::string_view metric) const {
  for (const auto& m : means)
    if (m.name == metric) return m.value;
  throw Error("NOT_FOUND", "no metric '" + std::string(metric) + "' in report row");
}

const ReportRow& ExperimentReport::row(std::string_view provider_id, PromptMode method, StepKind step) const {
  for (const auto& r : rows)
    if (r.provider_id == provider_id && r.method == method && r.step == step) return r;
  throw Error("NOT_FOUND", "no report row for " + std::string(provider_id) + "/" +
                               std::string(mode_name(method)) + "/" + std::string(step_name(step)));
}

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<PoolEntry> training_pool(const CorpusStore& store, const CorpusSplit& split, StepKind step) {
  std::vector<PoolEntry> pool;
  for (const auto& id : store.list(split, SplitPart::train)) {
    auto doc = store.get(id);
    try {
      format_example(doc, step);
      pool.push_back({id, retrieval_text(doc, step), doc.equipment_name + ": " + doc.short_description});
    } catch (const Error&) {
      // documents without this step's data cannot serve as shots
    }
  }
  return pool;
}

struct Job {
  size_t provider = 0;
  PromptMode method = PromptMode::zero_shot;
  StepKind step = StepKind::boundary;
  std::string doc_id;
};

DocumentResult evaluate_one(const Job& job, const CorpusStore& store, const ExperimentConfig& config,
                            const std::vector<PoolEntry>& pool, const Embedder& embedder,
                            Gateway& gateway, EmbeddingCache* cache) {
  const auto& provider = config.providers[job.provider];
  DocumentResult r;
  r.provider_id = provider.provider_id;
  r.method = job.method;
  r.step = job.step;
  r.doc_id = job.doc_id;
  for (const auto& name : metric_names(job.step)) r.metrics.push_back({name, 0.0});

  auto set = [&](std::string_view name, double v) {
    for (auto& m : r.metrics)
      if (m.name == name) m.value = v;
  };

  try {
    auto gold = store.get(job.doc_id);
    auto gold_items = flatten_step_items(gold, job.step);
    if (gold_items.empty() && job.step != StepKind::boundary)
      throw Error("EMPTY_GOLD", "document has no gold items for this step");

    std::vector<Shot> shots;
    if (job.method == PromptMode::random_shot) {
      auto seed = fnv1a64(std::to_string(config.seed) + ":" + job.doc_id);
      shots.push_back(make_shot(store.get(random_candidate(pool, seed).doc_id), job.step));
    } else if (job.method == PromptMode::dfsp) {
      auto ranked = rank_candidates(retrieval_text(gold, job.step), pool, config.k_shots, embedder, cache);
      for (const auto& c : ranked) shots.push_back(make_shot(store.get(c.doc_id), job.step));
    }
    for (const auto& s : shots) r.shot_ids.push_back(s.doc_id);

    auto prompt = build_prompt(job.step, job.method, step_input(gold, job.step), std::move(shots));
    auto response = gateway.complete(prompt, provider);
    r.prompt_hash = hex64(response.prompt_hash);
    auto parsed = parse(response.text, job.step);
    if (!parsed.ok()) {
      r.failed = true;
      r.error = std::string(parse_error_code(parsed.error));
      return r;
    }
    const auto& frag = *parsed.fragment;
    if (job.step == StepKind::boundary) {
      auto rouge = rouge1(frag.description.value_or(""), gold.boundary.description);
      set("rouge1", rouge.recall);
      set("rouge1_precision", rouge.precision);
      set("rouge1_f1", rouge.f1);
    }
    if (!gold_items.empty()) {
      auto sm = set_metrics(frag.items, gold_items, config.match_threshold);
      set("recall", sm.recall);
      set("precision", sm.precision);
      set("f1", sm.f1);
    }
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.code();
    for (auto& m : r.metrics) m.value = 0.0;
  }
  return r;
}

}  // namespace

ExperimentReport run_experiment(const CorpusStore& store, const CorpusSplit& split,
                                const ExperimentConfig& config, const Embedder& embedder,
                                Gateway& gateway, EmbeddingCache* cache) {
  if (config.providers.empty()) throw Error("INVALID_CONFIG", "no providers selected");
  if (config.k_shots < 1) throw Error("INVALID_CONFIG", "k must be at least 1");
  for (const auto& p : config.providers) validate_provider(p);

  const auto eval_ids = store.list(split, config.part);
  std::map<StepKind, std::vector<PoolEntry>> pools;
  for (auto step : config.steps) pools[step] = training_pool(store, split, step);

  std::vector<Job> jobs;
  for (size_t p = 0; p < config.providers.size(); ++p)
    for (auto method : config.methods)
      for (auto step : config.steps)
        for (const auto& id : eval_ids) jobs.push_back({p, method, step, id});

  std::vector<DocumentResult> results(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      if (pools.at(job.step).empty() && job.method != PromptMode::zero_shot) {
        DocumentResult r;
        r.provider_id = config.providers[job.provider].provider_id;
        r.method = job.method;
        r.step = job.step;
        r.doc_id = job.doc_id;
        r.failed = true;
        r.error = "EMPTY_POOL";
        for (const auto& name : metric_names(job.step)) r.metrics.push_back({name, 0.0});
        results[i] = std::move(r);
        continue;
      }
      results[i] = evaluate_one(job, store, config, pools.at(job.step), embedder, gateway, cache);
    }
  };
  {
    const size_t n_workers = std::clamp<size_t>(gateway.limits().global, 1, std::max<size_t>(jobs.size(), 1));
    std::vector<std::jthread> threads;
    for (size_t i = 1; i < n_workers; ++i) threads.emplace_back(worker);
    worker();
  }

  ExperimentReport report;
  report.split_seed = split.seed;
  report.part = config.part;
  Json providers = Json::array();
  for (const auto& p : config.providers)
    providers.push_back({{"provider_id", p.provider_id},
                         {"kind", provider_kind_name(p.kind)},
                         {"max_tokens", p.params.max_tokens},
                         {"temperature", p.params.temperature},
                         {"seed", p.params.seed ? Json(*p.params.seed) : Json(nullptr)}});
  Json steps = Json::array(), methods = Json::array();
  for (auto s : config.steps) steps.push_back(step_name(s));
  for (auto m : config.methods) methods.push_back(mode_name(m));
  report.config = {{"split_seed", split.seed},
                   {"split", split_part_name(config.part)},
                   {"steps", steps},
                   {"methods", methods},
                   {"providers", providers},
                   {"k_shots", config.k_shots},
                   {"seed", config.seed},
                   {"match_threshold", config.match_threshold}};

  size_t cursor = 0;
  for (size_t p = 0; p < config.providers.size(); ++p) {
    for (auto method : config.methods) {
      for (auto step : config.steps) {
        ReportRow row;
        row.provider_id = config.providers[p].provider_id;
        row.method = method;
        row.step = step;
        row.n = eval_ids.size();
        for (const auto& name : metric_names(step)) row.means.push_back({name, 0.0});
        for (size_t d = 0; d < eval_ids.size(); ++d) {
          const auto& r = results[cursor + d];
          if (r.failed) ++row.failures;
          for (size_t m = 0; m < row.means.size(); ++m) row.means[m].value += r.metrics[m].value;
        }
        if (row.n > 0)
          for (auto& m : row.means) m.value /= static_cast<double>(row.n);
        cursor += eval_ids.size();
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.documents = std::move(results);
  return report;
}

std::string ExperimentReport::to_csv() const {
  std::string out = "provider,method,step,metric,mean,n,failures\n";
  for (const auto& r : rows)
    for (const auto& m : r.means)
      out += r.provider_id + "," + std::string(mode_name(r.method)) + "," + std::string(step_name(r.step)) +
             "," + m.name + "," + fixed(m.value) + "," + std::to_string(r.n) + "," +
             std::to_string(r.failures) + "\n";
  return out;
}

Json ExperimentReport::to_json() const {
  Json j;
  j["config"] = config;
  j["rows"] = Json::array();
  for (const auto& r : rows) {
    Json means = Json::object();
    for (const auto& m : r.means) means[m.name] = m.value;
    j["rows"].push_back({{"provider", r.provider_id},
                         {"method", mode_name(r.method)},
                         {"step", step_name(r.step)},
                         {"n", r.n},
                         {"failures", r.failures},
                         {"means", means}});
  }
  j["documents"] = Json::array();
  for (const auto& d : documents) {
    Json metrics = Json::object();
    for (const auto& m : d.metrics) metrics[m.name] = m.value;
    j["documents"].push_back({{"provider", d.provider_id},
                              {"method", mode_name(d.method)},
                              {"step", step_name(d.step)},
                              {"doc_id", d.doc_id},
                              {"shots", d.shot_ids},
                              {"prompt_hash", d.prompt_hash},
                              {"failed", d.failed},
                              {"error", d.error.empty() ? Json(nullptr) : Json(d.error)},
                              {"metrics", metrics}});
  }
  return j;
}

std::string ExperimentReport::to_table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-12s %-18s %4s %5s  %s\n", "provider", "method", "step", "n",
                "fail", "metrics");
  out << line;
  for (const auto& r : rows) {
    std::string metrics;
    for (const auto& m : r.means) metrics += m.name + "=" + fixed(m.value, 3) + " ";
    std::snprintf(line, sizeof line, "%-16s %-12s %-18s %4zu %5zu  ", r.provider_id.c_str(),
                  std::string(mode_name(r.method)).c_str(), std::string(step_name(r.step)).c_str(), r.n,
                  r.failures);
    out << line << trim(metrics) << "\n";
  }
  return out.str();
}

}  // namespace fmea
