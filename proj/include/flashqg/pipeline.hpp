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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flashqg/corpus.hpp"
#include "flashqg/error.hpp"
#include "flashqg/gateway.hpp"

namespace flashqg::pipeline {

enum class SourceKind { original, human_summary, auto_summary };

/// "original", "human_summary", "auto_summary".
std::string to_string(SourceKind k);
/// Accepts both the underscore form and the CLI's hyphenated form.
SourceKind parse_source_kind(std::string_view s);

/// How human summaries are fed to question generation.
enum class Granularity { chapter, section };
std::string to_string(Granularity g);

struct QAPair {
  std::string pair_id;
  std::string question;
  std::string answer;
  SourceKind source_kind = SourceKind::original;
  std::string doc_id;
  std::string chapter_id;
  std::string section_id;
  std::size_t chunk_index = 0;
  /// Ordinal of the sentence within the segmented passage it came from.
  std::size_t sentence_index = 0;
  std::optional<std::string> author_id;
  std::string run_id;

  bool operator==(const QAPair&) const = default;
};

nlohmann::ordered_json to_json(const QAPair& p);
QAPair qa_pair_from_json(const nlohmann::json& j);

/// The passage text a pair's answer was extracted from.
struct ChunkRecord {
  std::optional<std::string> author_id;
  std::string chapter_id;
  std::vector<std::string> section_ids;
  std::size_t chunk_index = 0;
  bool oversized = false;
  std::string text;
};

struct RunManifest {
  nlohmann::json backend = nlohmann::json::object();
  std::string token_counter = "whitespace";
  std::size_t token_limit = segmentation::kDefaultTokenLimit;
  std::size_t chunk_token_limit = segmentation::kDefaultTokenLimit - segmentation::kHighlightMargin;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::string doc_id;
  bool dedupe = false;
  bool roundtrip_filter = false;
  std::string summary_granularity = "chapter";
  std::size_t sentence_count = 0;
  std::size_t pairs_before_filters = 0;
  std::vector<gateway::Rejection> rejections;
  /// Set when the run stopped early; pairs up to the failure are kept.
  std::optional<std::string> failure;
};

struct QuestionSet {
  std::string run_id;
  SourceKind source_kind = SourceKind::original;
  std::vector<QAPair> pairs;
  RunManifest manifest;
  std::vector<ChunkRecord> chunks;

  /// Chunk a pair was generated from, or nullptr when unknown (for instance
  /// a set loaded without its manifest).
  const ChunkRecord* chunk_for(const QAPair& pair) const;
  const QAPair* find(std::string_view pair_id) const;
};

struct GenerateConfig {
  std::size_t token_limit = segmentation::kDefaultTokenLimit;
  bool dedupe = false;
  bool roundtrip_filter = false;
  Granularity summary_granularity = Granularity::chapter;
  /// Concurrent gateway calls; output order never depends on this.
  unsigned workers = 1;
  /// Derived from the inputs when empty.
  std::string run_id;
};

/// Thrown when a backend fails mid-run; carries everything generated so far
/// with `manifest.failure` set.
class GenerationError : public BackendError {
 public:
  GenerationError(const std::string& what, QuestionSet partial)
      : BackendError(what), partial_(std::move(partial)) {}
  const QuestionSet& partial() const noexcept { return partial_; }

 private:
  QuestionSet partial_;
};

/// End-to-end answer-agnostic generation over a document.
///
/// original      each section is segmented, chunked and every sentence is
///               highlighted in turn; at most one answer is kept per
///               sentence and one question generated per answer.
/// auto_summary  each section is first passed through summarize_long.
/// human_summary uses `summaries`; one author's section summaries are
///               concatenated per chapter (or used per section, see
///               GenerateConfig::summary_granularity).
QuestionSet generate(const corpus::SourceDocument& doc, SourceKind kind,
                     gateway::Backend& backend, const GenerateConfig& config,
                     const std::vector<corpus::SummarySet>& summaries = {});

/// Generation over a bare passage, treated as one section "s1" of chapter
/// "ch1" in a document named "text". Throws PreconditionError("empty input").
QuestionSet generate_text(std::string_view text, SourceKind kind,
                          gateway::Backend& backend, const GenerateConfig& config);

/// Drops later pairs whose case-folded (question, answer) already appeared.
QuestionSet dedupe(const QuestionSet& qs);

/// Keeps pairs whose stored answer and the backend's answer to the question
/// (both case-folded, punctuation stripped) contain one another.
QuestionSet roundtrip_filter(const QuestionSet& qs, gateway::Backend& backend);

struct EvalSet {
  std::string eval_id;
  std::vector<std::string> entries;
  std::size_t per_source_quota = 0;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_json(const EvalSet& e);
EvalSet eval_set_from_json(const nlohmann::json& j);

/// Uniform sampling without replacement of `quota` pairs from each set,
/// seeded with mt19937_64; the combined entries are shuffled so that the
/// presentation order does not reveal the source. Throws PreconditionError
/// if a set is smaller than the quota or two sets share a source kind.
EvalSet sample_eval_set(const std::vector<QuestionSet>& sets, std::size_t quota,
                        std::uint64_t seed);

// Persistence: `<prefix>.pairs.jsonl` plus `<prefix>.manifest.json`.

std::filesystem::path pairs_path(const std::filesystem::path& prefix);
std::filesystem::path manifest_path(const std::filesystem::path& prefix);

void save_question_set(const QuestionSet& qs, const std::filesystem::path& prefix);

/// Accepts a prefix or the `.pairs.jsonl` path. The manifest is optional.
QuestionSet load_question_set(const std::filesystem::path& path);

std::string pairs_jsonl(const QuestionSet& qs);
nlohmann::ordered_json manifest_json(const QuestionSet& qs);

void save_eval_set(const EvalSet& e, const std::filesystem::path& path);
EvalSet load_eval_set(const std::filesystem::path& path);

}  // namespace flashqg::pipeline
