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

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flashqg/error.hpp"
#include "flashqg/segmentation.hpp"

namespace flashqg::gateway {

enum class Capability {
  extract_answer,
  generate_question,
  answer_question,
  summarize,
  count_tokens,
};

enum class BackendKind { plugin, http, fake };

std::string to_string(Capability c);
std::string to_string(BackendKind k);

struct BackendDescriptor {
  std::string name;
  BackendKind kind = BackendKind::fake;
  std::set<Capability> capabilities;
  /// Sentinel placed around the sentence an answer is extracted from.
  std::string highlight_marker = "⟨hl⟩";
  /// Free-form decoding settings, copied into run manifests.
  nlohmann::json config = nlohmann::json::object();

  bool supports(Capability c) const { return capabilities.contains(c); }
  nlohmann::json to_json() const;
};

/// The text-to-text tasks a backend serves. Field use per task:
///   extract_answer     context = highlighted chunk
///   generate_question  context = chunk, answer
///   answer_question    context = chunk, question
///   summarize          context = passage
enum class Task { extract_answer, generate_question, answer_question, summarize };

std::string to_string(Task t);

struct Request {
  Task task = Task::extract_answer;
  std::string context;
  std::string answer;
  std::string question;
};

/// A model backend. Implementations must be safe to call from several
/// threads at once and should be idempotent per request.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  /// Decoded model output. Throws BackendError on transport failure.
  virtual std::string run(const Request& request) = 0;
  virtual const segmentation::TokenCounter& token_counter() const {
    return segmentation::whitespace_counter();
  }
};

/// Deterministic stand-in for a fine-tuned model:
///   extract_answer     first run of capitalized alphabetic words in the
///                      highlighted sentence (a run at position 0 only when
///                      nothing else qualifies and it spans two or more
///                      words), else the longest word; punctuation stripped
///   generate_question  "What is " + answer + "?"
///   answer_question    first capitalized run of the chunk, else longest word
///   summarize          first sentence of the input
class FakeBackend final : public Backend {
 public:
  FakeBackend();
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::string run(const Request& request) override;

 private:
  BackendDescriptor descriptor_;
};

struct HttpBackendOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8000"
  std::string highlight_marker = "<hl>";
  std::chrono::milliseconds min_interval{0};
  std::chrono::seconds timeout{120};
};

/// Talks to a server implementing POST /v1/generate with body
/// {"task", "input", "answer"?} and response {"output"}. Non-200 replies and
/// connection errors raise BackendError.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::string run(const Request& request) override;

  /// The JSON body sent for a request.
  static nlohmann::json wire_body(const Request& request);

 private:
  void throttle();

  HttpBackendOptions options_;
  BackendDescriptor descriptor_;
  std::mutex throttle_mu_;
  std::chrono::steady_clock::time_point last_call_{};
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

/// Registers an in-process backend under `name`, replacing any previous one.
void register_backend(const std::string& name, BackendFactory factory);

/// "fake", "http" (base URL from QG_BACKEND_URL) or a registered plugin.
/// Throws NotFoundError for unknown names.
std::unique_ptr<Backend> make_backend(const std::string& name);

// ---------------------------------------------------------------------------
// Highlighting

struct HighlightedContext {
  std::size_t chunk_index = 0;
  /// Position of the highlighted sentence inside the chunk.
  std::size_t highlighted_sentence_index = 0;
  std::string marker;
  std::string chunk_text;
  std::string sentence_text;
  std::string rendered_text;
};

/// Wraps sentence `sentence_index` of `chunk` as "<m> sentence <m>".
/// Throws PreconditionError when the index is out of range or the chunk
/// already contains the marker.
HighlightedContext insert_highlights(const segmentation::Chunk& chunk,
                                     std::size_t sentence_index,
                                     std::string_view marker);

/// Inverse of insert_highlights on its rendered text.
std::string remove_highlights(std::string_view rendered, std::string_view marker);

// ---------------------------------------------------------------------------
// Task wrappers

struct AnswerSpan {
  std::string text;
  bool found_in_sentence = false;
  bool found_in_chunk = false;
};

struct Rejection {
  std::size_t chunk_index = 0;
  std::size_t sentence_index = 0;
  std::string span;
  std::string reason;
};

/// Asks the backend for at most one answer in the highlighted sentence.
/// Returns nullopt when the backend yields nothing or a span that does not
/// occur in the chunk; the latter is logged and appended to `rejections`.
std::optional<AnswerSpan> extract_answer(Backend& backend,
                                         const HighlightedContext& hc,
                                         std::vector<Rejection>* rejections = nullptr);

/// Throws PreconditionError unless answer.found_in_chunk, BackendError on an
/// empty generation ("empty question").
std::string generate_question(Backend& backend, const segmentation::Chunk& chunk,
                              const AnswerSpan& answer);

std::string answer_question(Backend& backend, std::string_view chunk_text,
                            std::string_view question);

/// Failure part-way through summarize_long.
class SummarizeError : public BackendError {
 public:
  SummarizeError(const std::string& what, std::vector<std::string> partial,
                 std::size_t failed_chunk)
      : BackendError(what), partial_(std::move(partial)), failed_chunk_(failed_chunk) {}
  const std::vector<std::string>& partial() const noexcept { return partial_; }
  std::size_t failed_chunk() const noexcept { return failed_chunk_; }

 private:
  std::vector<std::string> partial_;
  std::size_t failed_chunk_;
};

/// Summarizes text of any length: passages within `token_limit` go to the
/// backend in one call; longer ones are chunked, summarized chunk by chunk
/// and the outputs joined with single spaces.
std::string summarize_long(Backend& backend, std::string_view text,
                           std::size_t token_limit = segmentation::kDefaultTokenLimit);

/// Throws BackendError("unsupported ...") unless the backend has `c`.
void require(const Backend& backend, Capability c);

}  // namespace flashqg::gateway
