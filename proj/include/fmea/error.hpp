// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

namespace fmea {

/// Exception carrying a machine-readable code (e.g. "DUPLICATE_ID") plus
/// optional structured detail. The workflow service maps codes to HTTP
/// statuses and serializes the detail verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        nlohmann::ordered_json detail = nullptr)
      : std::runtime_error(message),
        code_(std::move(code)),
        detail_(std::move(detail)) {}

  const std::string& code() const noexcept { return code_; }
  const nlohmann::ordered_json& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  nlohmann::ordered_json detail_;
};

}  // namespace fmea
