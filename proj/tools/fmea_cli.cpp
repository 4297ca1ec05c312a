// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "fmea/config.hpp"
#include "fmea/corpus.hpp"
#include "fmea/error.hpp"
#include "fmea/eval.hpp"
#include "fmea/text.hpp"
#include "fmea/workflow.hpp"

namespace fs = std::filesystem;
using namespace fmea;

namespace {

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& csv, const std::vector<T>& all, Parse parse_one) {
  if (csv == "all") return all;
  std::vector<T> out;
  for (const auto& part : split(csv, ",")) out.push_back(parse_one(trim(part)));
  return out;
}

SplitRatios parse_ratios(const std::string& text) {
  auto parts = split(text, ",");
  if (parts.size() != 3) throw Error("INVALID_RATIOS", "--ratios needs three comma-separated values");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    char* end = nullptr;
    const auto s = trim(parts[i]);
    v[i] = std::strtod(s.c_str(), &end);
    if (s.empty() || *end) throw Error("INVALID_RATIOS", "not a number: '" + s + "'");
  }
  return {v[0], v[1], v[2]};
}

fs::path document_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("IO_ERROR", "not a directory: " + dir.string());
  return fs::is_directory(dir / "corpus") ? dir / "corpus" : dir;
}

int cmd_ingest(CorpusStore& store, const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(document_dir(dir)))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  size_t added = 0, skipped = 0;
  for (const auto& file : files) {
    FmeaDocument doc;
    try {
      doc = document_from_json(Json::parse(read_file(file)));
    } catch (const std::exception& e) {
      throw Error("INVALID_DOCUMENT", file.string() + ": " + e.what());
    }
    if (store.contains(doc.doc_id)) {
      if (!(store.get(doc.doc_id) == doc))
        std::cerr << "warning: " << file.string() << ": '" << doc.doc_id
                  << "' already stored with different content; kept the stored version\n";
      ++skipped;
      continue;
    }
    try {
      store.ingest(doc);
    } catch (const Error& e) {
      throw Error(e.code(), file.string() + ": " + e.what(), e.detail());
    }
    ++added;
  }
  std::cout << added << " new, " << skipped << " skipped duplicates\n";
  return 0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised FMEA generation: corpus, evaluation and review service"};
  app.require_subcommand(1);

  std::string config_path;
  std::string corpus_flag;
  app.add_option("--config", config_path, "Config file (default: $FMEA_CONFIG)");
  app.add_option("--corpus", corpus_flag, "Corpus directory (overrides config and $FMEA_CORPUS_DIR)");

  auto* ingest = app.add_subcommand("ingest", "Add every document in a directory to the corpus");
  std::string ingest_dir;
  ingest->add_option("dir", ingest_dir, "Directory of document JSON files (or one with a corpus/ subdirectory)")
      ->required();

  auto* split_cmd = app.add_subcommand("split", "Create and save a train/validation/test split");
  std::uint64_t split_seed = 0;
  std::string ratios_text = "0.8,0.1,0.1";
  split_cmd->add_option("--seed", split_seed, "Shuffle seed")->required();
  split_cmd->add_option("--ratios", ratios_text, "train,validation,test fractions")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Run the zero-shot / random-shot / DFSP comparison");
  std::string eval_steps = "boundary,failure_locations";
  std::string eval_methods = "all";
  std::string eval_providers = "mock_lookup";
  std::string eval_part = "test";
  std::optional<size_t> eval_k;
  std::optional<std::uint64_t> eval_seed;
  std::string eval_out = "reports";
  double eval_match = 1.0;
  eval->add_option("--step", eval_steps, "Comma-separated steps or 'all'")->capture_default_str();
  eval->add_option("--method", eval_methods, "zero_shot,random_shot,dfsp or 'all'")->capture_default_str();
  eval->add_option("--provider", eval_providers, "Comma-separated provider ids")->capture_default_str();
  eval->add_option("--split", eval_part, "train | validation | test")->capture_default_str();
  eval->add_option("--k", eval_k, "Shots retrieved for DFSP (default from config)");
  eval->add_option("--seed", eval_seed, "Split and random-shot seed (default from config)");
  eval->add_option("--out", eval_out, "Directory for report.csv and report.json")->capture_default_str();
  eval->add_option("--match-threshold", eval_match, "Item match threshold; 1.0 = normalized exact")->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Run the review service");
  std::optional<int> serve_port;
  std::string serve_sessions;
  std::string serve_ui;
  serve_cmd->add_option("--port", serve_port, "Listen port (default $FMEA_PORT or 8080)");
  serve_cmd->add_option("--sessions", serve_sessions, "Session log directory");
  serve_cmd->add_option("--ui", serve_ui, "Static UI directory served at /ui/");

  auto* embed = app.add_subcommand("embed", "Manage the embedding cache");
  bool rebuild = false;
  embed->add_flag("--rebuild", rebuild, "Drop the cache and embed every document again");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = load_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    if (!corpus_flag.empty()) cfg.corpus_dir = corpus_flag;
    CorpusStore store(cfg.corpus_dir);

    if (*ingest) return cmd_ingest(store, ingest_dir);

    if (*split_cmd) {
      auto s = store.make_split(split_seed, parse_ratios(ratios_text));
      store.save_split(s);
      std::cout << "train=" << s.train_ids.size() << " validation=" << s.validation_ids.size()
                << " test=" << s.test_ids.size() << "\n";
      return 0;
    }

    if (*embed) {
      auto embedder = make_embedder(cfg);
      if (rebuild) store.embeddings().clear();
      store.embeddings().retain_only(*embedder);
      const size_t n = store.embed_all(*embedder);
      store.save_embeddings();
      std::cout << n << " embeddings computed with " << embedder->id() << ", " << store.embeddings().size() << " cached\n";
      return 0;
    }

    const auto providers = resolve_providers(cfg);
    auto find_provider = [&](const std::string& id) {
      for (const auto& p : providers)
        if (p.provider_id == id) return p;
      throw Error("UNKNOWN_PROVIDER", "no provider '" + id + "'");
    };
    auto embedder = make_embedder(cfg);
    Gateway gateway({cfg.max_in_flight, cfg.global_in_flight});

    if (*eval) {
      ExperimentConfig ec;
      ec.steps = parse_list<StepKind>(eval_steps, {kAllSteps.begin(), kAllSteps.end()},
                                      [](const std::string& s) { return parse_step(s); });
      ec.methods = parse_list<PromptMode>(eval_methods,
                                          {PromptMode::zero_shot, PromptMode::random_shot, PromptMode::dfsp},
                                          [](const std::string& s) { return parse_mode(s); });
      for (const auto& id : split(eval_providers, ",")) ec.providers.push_back(find_provider(trim(id)));
      ec.part = parse_split_part(eval_part);
      ec.k_shots = eval_k.value_or(cfg.k_shots);
      ec.seed = eval_seed.value_or(cfg.seed);
      ec.match_threshold = eval_match;
      const auto split_used = store.split_for(ec.seed);
      auto report = run_experiment(store, split_used, ec, *embedder, gateway, &store.embeddings());
      std::cout << report.to_table();
      fs::create_directories(eval_out);
      write_text(fs::path(eval_out) / "report.csv", report.to_csv());
      write_text(fs::path(eval_out) / "report.json", report.to_json().dump(2) + "\n");
      return 0;
    }

    if (*serve_cmd) {
      ServiceConfig sc;
      sc.sessions_dir = serve_sessions.empty() ? cfg.sessions_dir : fs::path(serve_sessions);
      sc.split_seed = cfg.seed;
      sc.default_k = cfg.k_shots;
      sc.vote_threshold = cfg.vote_threshold;
      sc.fuzzy_threshold = cfg.fuzzy_threshold;
      WorkflowService service(store, *embedder, gateway, providers, sc);
      ServeOptions so;
      so.port = serve_port.value_or(cfg.port);
      so.ui_dir = serve_ui.empty() ? cfg.ui_dir : fs::path(serve_ui);
      serve(service, so);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    if (!e.detail().is_null()) std::cerr << e.detail().dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
