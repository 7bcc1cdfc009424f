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

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flashqg/metrics.hpp"
#include "flashqg/pipeline.hpp"

namespace flashqg::annotation {

using metrics::AnnotationRecord;

/// What an annotator sees: the pair without its source passage.
struct QuestionView {
  std::string pair_id;
  std::string question;
  std::string answer;
  std::size_t position = 0;  // 1-based
  std::size_t total = 0;
};

struct Progress {
  std::string annotator_id;
  std::size_t completed = 0;
  std::size_t pending = 0;
};

struct Guideline {
  metrics::Category category;
  std::string question;
  std::string guideline;
};

/// Built-in per-category instructions, including the skip rule.
std::vector<Guideline> default_guidelines();
/// JSON file of the same shape as GET /api/guidelines.
std::vector<Guideline> load_guidelines(const std::filesystem::path& path);
nlohmann::ordered_json guidelines_json(const std::vector<Guideline>& g);

struct ReplayStats {
  std::size_t records = 0;
  /// Bytes of an incomplete trailing line dropped (torn write after a crash).
  std::size_t torn_bytes = 0;
};

/// Evaluation-set annotations backed by an append-only JSON Lines log.
///
/// Every accepted submission is appended (and fsync'd) before it becomes
/// visible; the export keeps the highest revision per (pair, annotator).
/// Opening a log replays it; a torn final line is truncated away. Writers are
/// serialized; readers work on immutable snapshots.
class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  AnnotationStore(pipeline::EvalSet eval_set,
                  const std::vector<pipeline::QuestionSet>& sets,
                  std::vector<std::string> annotators, std::filesystem::path log_path,
                  Clock clock = {});
  ~AnnotationStore();

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  /// Lowest-ordered eval-set pair the annotator has not labelled, or nullopt
  /// when done. Throws NotFoundError for an unknown annotator.
  std::optional<QuestionView> next_question(std::string_view annotator_id) const;

  /// Validates and appends a raw (unexpanded) label; returns its revision.
  /// Throws NotFoundError (unknown pair/annotator) or PreconditionError
  /// (label fails the skip rule).
  std::size_t record_annotation(const AnnotationRecord& record);

  /// Latest expanded record per (pair, annotator), sorted by that key.
  /// Throws NotFoundError when `eval_id` is not the loaded evaluation set.
  std::vector<AnnotationRecord> export_annotations(std::string_view eval_id) const;
  std::string export_jsonl(std::string_view eval_id) const;

  std::vector<Progress> progress() const;
  const pipeline::EvalSet& eval_set() const { return eval_; }
  const std::vector<std::string>& annotators() const { return annotators_; }
  ReplayStats replay_stats() const { return replay_; }

 private:
  using Key = std::pair<std::string, std::string>;  // (pair_id, annotator_id)
  struct Snapshot {
    std::map<Key, AnnotationRecord> latest;
  };

  std::shared_ptr<const Snapshot> snapshot() const;
  void replay();
  void append_line(const std::string& line);

  pipeline::EvalSet eval_;
  std::set<std::string> eval_ids_;
  std::map<std::string, std::pair<std::string, std::string>> qa_;  // pair -> (q, a)
  std::vector<std::string> annotators_;
  std::filesystem::path log_path_;
  Clock clock_;
  int fd_ = -1;
  ReplayStats replay_;

  std::mutex write_mu_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
};

/// Replays a log file without opening it for writing. Returns the latest
/// record per (pair, annotator), raw labels, in key order.
std::vector<AnnotationRecord> replay_log(const std::filesystem::path& path,
                                         ReplayStats* stats = nullptr);

/// Reads an export (JSON Lines or a JSON array of records).
std::vector<AnnotationRecord> load_export(const std::filesystem::path& path);

struct ServerOptions {
  std::vector<Guideline> guidelines = default_guidelines();
  /// Served at "/" when set (the browser client).
  std::optional<std::filesystem::path> static_dir;
};

/// JSON API over an AnnotationStore:
///   GET  /api/next?annotator=ID
///   POST /api/annotations          (AnnotationRecord body) -> {"revision"}
///   GET  /api/export?eval=ID
///   GET  /api/progress
///   GET  /api/guidelines
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerOptions options = {});
  ~AnnotationServer();

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flashqg::annotation
