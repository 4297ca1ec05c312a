// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "fmea/model.hpp"

namespace fmea::testing {

inline std::filesystem::path fixture_dir() { return FMEA_FIXTURE_DIR; }

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fmea-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Small fully-populated valid document.
inline FmeaDocument sample_document(const std::string& id = "pump-a") {
  FmeaDocument d;
  d.doc_id = id;
  d.equipment_name = "Pump A";
  d.short_description = "centrifugal pump";
  d.boundary = {"Moves fluid", {"Casing", "Impeller", "Bearings"}};
  d.locations = {{"loc-1", "Bearings", "Bearings"}, {"loc-2", "Impeller", "Impeller"}};
  d.mechanisms = {{"mech-1", "Bearing fatigue", "loc-1"},
                  {"mech-2", "Impeller erosion", "loc-2"},
                  {"mech-3", "Bearing overheating", "loc-1"}};
  d.influences = {{"infl-1", "Poor lubrication", "mech-1"}};
  d.tasks = {{"task-1", "Check bearing temperature", "loc-1", "mech-1", "infl-1"},
             {"task-2", "Inspect impeller", "loc-2", std::nullopt, std::nullopt}};
  d.job_plans = {{"plan-1", "Monthly", {"task-1", "task-2"}, "every month"}};
  return d;
}

}  // namespace fmea::testing
