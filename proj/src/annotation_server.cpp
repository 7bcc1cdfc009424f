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

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "flashqg/annotation.hpp"
#include "flashqg/error.hpp"

namespace flashqg::annotation {

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, nlohmann::ordered_json{{"error", message}});
}

// Maps library exceptions onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFoundError& e) {
    reply_error(res, 404, e.what());
  } catch (const PreconditionError& e) {
    reply_error(res, 400, e.what());
  } catch (const nlohmann::json::exception& e) {
    reply_error(res, 400, std::string("bad json: ") + e.what());
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    reply_error(res, 500, e.what());
  }
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationStore& store;
  ServerOptions options;
  httplib::Server server;

  Impl(AnnotationStore& s, ServerOptions o) : store(s), options(std::move(o)) {
    server.Get("/api/next", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("annotator")) {
          reply_error(res, 400, "missing 'annotator' parameter");
          return;
        }
        const auto next = store.next_question(req.get_param_value("annotator"));
        nlohmann::ordered_json j;
        if (!next) {
          j["done"] = true;
          j["total"] = store.eval_set().entries.size();
        } else {
          j["done"] = false;
          j["pair_id"] = next->pair_id;
          j["question"] = next->question;
          j["answer"] = next->answer;
          j["position"] = next->position;
          j["total"] = next->total;
        }
        reply_json(res, 200, j);
      });
    });

    server.Post("/api/annotations",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const auto record =
                        metrics::record_from_json(nlohmann::json::parse(req.body));
                    const auto revision = store.record_annotation(record);
                    reply_json(res, 200, nlohmann::ordered_json{{"revision", revision}});
                  });
                });

    server.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string eval = req.has_param("eval") ? req.get_param_value("eval")
                                                       : store.eval_set().eval_id;
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : store.export_annotations(eval)) arr.push_back(metrics::to_json(r));
        reply_json(res, 200, arr);
      });
    });

    server.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        nlohmann::ordered_json j;
        j["eval_id"] = store.eval_set().eval_id;
        j["total"] = store.eval_set().entries.size();
        auto& list = j["annotators"] = nlohmann::ordered_json::array();
        for (const auto& p : store.progress()) {
          list.push_back({{"annotator_id", p.annotator_id},
                          {"completed", p.completed},
                          {"pending", p.pending}});
        }
        reply_json(res, 200, j);
      });
    });

    server.Get("/api/guidelines", [this](const httplib::Request&, httplib::Response& res) {
      reply_json(res, 200, guidelines_json(options.guidelines));
    });

    if (options.static_dir) {
      if (!server.set_mount_point("/", options.static_dir->string())) {
        throw Error("static directory not found: " + options.static_dir->string());
      }
    }
  }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void AnnotationServer::run() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace flashqg::annotation
