// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmea/corpus.hpp"
#include "fmea/embedding.hpp"
#include "fmea/gateway.hpp"
#include "fmea/prompt.hpp"

namespace fmea {

struct Rouge1Score {
  double recall = 0;
  double precision = 0;
  double f1 = 0;
};

/// Clipped unigram overlap over lowercased alphanumeric tokens. Precision is
/// 0 for an empty candidate. Throws EMPTY_REFERENCE.
Rouge1Score rouge1(std::string_view candidate, std::string_view reference);

struct SetMetrics {
  double recall = 0;
  double precision = 0;
  double f1 = 0;
  std::vector<std::pair<std::string, std::string>> matched_pairs;  // (predicted, gold)
};

/// Score used to match list items: 1.0 when the names are equal after
/// normalize_name(), otherwise the token Jaccard similarity capped just
/// below 1.0. A threshold of 1.0 therefore means normalized exact match.
double match_score(std::string_view predicted, std::string_view gold);

/// Greedy one-to-one matching: each predicted item, in order, takes the
/// unmatched gold item with the highest match_score >= threshold (lowest
/// index on ties). An empty prediction scores 0/0/0. Throws EMPTY_GOLD.
SetMetrics set_metrics(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
                       double fuzzy_threshold = 1.0);

struct ExperimentConfig {
  std::vector<StepKind> steps = {StepKind::boundary, StepKind::failure_locations};
  std::vector<PromptMode> methods = {PromptMode::zero_shot, PromptMode::random_shot, PromptMode::dfsp};
  std::vector<ProviderConfig> providers;
  SplitPart part = SplitPart::test;
  size_t k_shots = 3;
  std::uint64_t seed = 7;
  double match_threshold = 1.0;
};

struct MetricValue {
  std::string name;
  double value = 0;
};

struct DocumentResult {
  std::string provider_id;
  PromptMode method = PromptMode::zero_shot;
  StepKind step = StepKind::boundary;
  std::string doc_id;
  std::vector<std::string> shot_ids;
  std::string prompt_hash;
  bool failed = false;  // unparseable response or per-document error
  std::string error;    // error code when failed
  std::vector<MetricValue> metrics;
};

struct ReportRow {
  std::string provider_id;
  PromptMode method = PromptMode::zero_shot;
  StepKind step = StepKind::boundary;
  size_t n = 0;
  size_t failures = 0;
  std::vector<MetricValue> means;

  double mean(std::string_view metric) const;
};

struct ExperimentReport {
  std::uint64_t split_seed = 0;
  SplitPart part = SplitPart::test;
  Json config;
  std::vector<ReportRow> rows;
  std::vector<DocumentResult> documents;

  const ReportRow& row(std::string_view provider_id, PromptMode method, StepKind step) const;
  /// provider,method,step,metric,mean,n,failures
  std::string to_csv() const;
  Json to_json() const;
  std::string to_table() const;
};

/// Metric names emitted for a step: boundary reports rouge1 (recall),
/// rouge1_precision, rouge1_f1, recall, precision, f1; list steps report
/// recall, precision, f1.
std::vector<std::string> metric_names(StepKind step);

/// The zero-shot / random-shot / DFSP grid over every document of one split
/// part. Shots always come from the training split. Each query uses gold
/// upstream data. Per-document failures are recorded, never thrown; the
/// report is identical for identical inputs regardless of scheduling.
ExperimentReport run_experiment(const CorpusStore& store, const CorpusSplit& split,
                                const ExperimentConfig& config, const Embedder& embedder,
                                Gateway& gateway, EmbeddingCache* cache = nullptr);

}  // namespace fmea
