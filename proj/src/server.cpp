// SPDX-License-Identifier: Apache-2.0
// Eigen must precede httplib: <resolv.h> defines a _res macro.
#include "fmea/workflow.hpp"

#include <httplib.h>

#include <iostream>

#include "fmea/error.hpp"

namespace fmea {

void serve(WorkflowService& service, const ServeOptions& options) {
  httplib::Server server;

  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api{req.method, req.path, {}, req.body};
    for (const auto& [key, value] : req.params) api.query.emplace(key, value);
    auto out = handle_request(service, api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  const char* api_pattern = R"(/(sessions|documents)(/.*)?)";
  server.Get(api_pattern, dispatch);
  server.Post(api_pattern, dispatch);
  server.Put(api_pattern, dispatch);

  if (!options.ui_dir.empty()) {
    if (!server.set_mount_point("/ui", options.ui_dir.string()))
      throw Error("IO_ERROR", "cannot serve UI from " + options.ui_dir.string());
    server.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
  }

  if (!server.bind_to_port(options.host, options.port))
    throw Error("IO_ERROR", "cannot bind " + options.host + ":" + std::to_string(options.port));
  std::cerr << "listening on " << options.host << ":" << options.port << "\n";
  server.listen_after_bind();
}

}  // namespace fmea
