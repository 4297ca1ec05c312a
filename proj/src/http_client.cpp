// SPDX-License-Identifier: Apache-2.0
#include "fmea/http_client.hpp"

#include "httplib.h"

namespace fmea {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResult http_post_json(const std::string& url, const std::string& token, const std::string& body,
                          std::chrono::milliseconds timeout) {
  HttpResult out;
  auto parts = split_url(url);
  httplib::Client client(parts.origin);
  if (!client.is_valid()) {
    out.failure = HttpResult::Failure::connection;
    out.error = "invalid URL '" + url + "'";
    return out;
  }
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  auto res = client.Post(parts.path, headers, body, "application/json");
  if (!res) {
    auto err = res.error();
    out.failure = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                      ? HttpResult::Failure::timeout
                      : HttpResult::Failure::connection;
    out.error = httplib::to_string(err);
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace fmea
