// Copyright 2026 The flashqg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "flashqg/gateway.hpp"

namespace flashqg::gateway {

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  while (!options_.base_url.empty() && options_.base_url.back() == '/') {
    options_.base_url.pop_back();
  }
  descriptor_.name = "http";
  descriptor_.kind = BackendKind::http;
  descriptor_.capabilities = {Capability::extract_answer, Capability::generate_question,
                              Capability::answer_question, Capability::summarize};
  descriptor_.highlight_marker = options_.highlight_marker;
  descriptor_.config = {{"url", options_.base_url},
                        {"min_interval_ms", options_.min_interval.count()},
                        {"timeout_s", options_.timeout.count()}};
}

nlohmann::json HttpBackend::wire_body(const Request& request) {
  nlohmann::json body = {{"task", to_string(request.task)}};
  switch (request.task) {
    case Task::extract_answer:
    case Task::summarize:
      body["input"] = request.context;
      break;
    case Task::generate_question:
      body["input"] = request.context;
      body["answer"] = request.answer;
      break;
    case Task::answer_question:
      body["input"] = "question: " + request.question + " context: " + request.context;
      break;
  }
  return body;
}

void HttpBackend::throttle() {
  if (options_.min_interval.count() <= 0) return;
  std::lock_guard lock(throttle_mu_);
  const auto now = std::chrono::steady_clock::now();
  const auto ready = last_call_ + options_.min_interval;
  if (now < ready) std::this_thread::sleep_for(ready - now);
  last_call_ = std::chrono::steady_clock::now();
}

std::string HttpBackend::run(const Request& request) {
  throttle();
  // httplib::Client is not safe for concurrent use; one per call.
  httplib::Client client(options_.base_url);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  const auto res =
      client.Post("/v1/generate", wire_body(request).dump(), "application/json");
  if (!res) {
    throw BackendError(fmt::format("http backend {}: {}", options_.base_url,
                                   httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw BackendError(
        fmt::format("http backend {}: status {}", options_.base_url, res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("output").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(fmt::format("http backend: bad reply: {}", e.what()));
  }
}

}  // namespace flashqg::gateway
