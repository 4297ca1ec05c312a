// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>

namespace fmea {

struct HttpResult {
  enum class Failure { none, timeout, connection };

  int status = 0;
  std::string body;
  Failure failure = Failure::none;
  std::string error;

  bool transport_ok() const { return failure == Failure::none; }
};

/// Blocking JSON POST to an absolute http:// URL. A non-empty token is sent
/// as "Authorization: Bearer <token>". Transport failures are reported in the
/// result, never thrown.
HttpResult http_post_json(const std::string& url, const std::string& token, const std::string& body,
                          std::chrono::milliseconds timeout);

}  // namespace fmea
