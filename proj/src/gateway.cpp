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

#include "flashqg/gateway.hpp"

#include <cstdlib>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "flashqg/text.hpp"

namespace flashqg::gateway {

std::string to_string(Capability c) {
  switch (c) {
    case Capability::extract_answer: return "extract_answer";
    case Capability::generate_question: return "generate_question";
    case Capability::answer_question: return "answer_question";
    case Capability::summarize: return "summarize";
    case Capability::count_tokens: return "count_tokens";
  }
  return "?";
}

std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::plugin: return "plugin";
    case BackendKind::http: return "http";
    case BackendKind::fake: return "fake";
  }
  return "?";
}

std::string to_string(Task t) {
  switch (t) {
    case Task::extract_answer: return "extract_answer";
    case Task::generate_question: return "generate_question";
    case Task::answer_question: return "answer_question";
    case Task::summarize: return "summarize";
  }
  return "?";
}

nlohmann::json BackendDescriptor::to_json() const {
  nlohmann::json caps = nlohmann::json::array();
  for (Capability c : capabilities) caps.push_back(to_string(c));
  return {{"name", name},
          {"kind", to_string(kind)},
          {"capabilities", caps},
          {"highlight_marker", highlight_marker},
          {"config", config}};
}

namespace {

std::mutex& registry_mu() {
  static std::mutex mu;
  return mu;
}

std::map<std::string, BackendFactory>& registry() {
  static std::map<std::string, BackendFactory> factories;
  return factories;
}

}  // namespace

void register_backend(const std::string& name, BackendFactory factory) {
  std::lock_guard lock(registry_mu());
  registry()[name] = std::move(factory);
}

std::unique_ptr<Backend> make_backend(const std::string& name) {
  {
    std::lock_guard lock(registry_mu());
    if (auto it = registry().find(name); it != registry().end()) {
      return it->second();
    }
  }
  if (name == "fake") return std::make_unique<FakeBackend>();
  if (name == "http") {
    const char* url = std::getenv("QG_BACKEND_URL");
    if (url == nullptr || *url == '\0') {
      throw Error("http backend needs QG_BACKEND_URL");
    }
    HttpBackendOptions opts;
    opts.base_url = url;
    if (const char* hl = std::getenv("QG_HIGHLIGHT_TOKEN"); hl && *hl) {
      opts.highlight_marker = hl;
    }
    return std::make_unique<HttpBackend>(std::move(opts));
  }
  throw NotFoundError(fmt::format("unknown backend '{}'", name));
}

void require(const Backend& backend, Capability c) {
  if (!backend.descriptor().supports(c)) {
    throw BackendError(fmt::format("unsupported: backend '{}' lacks {}",
                                   backend.descriptor().name, to_string(c)));
  }
}

HighlightedContext insert_highlights(const segmentation::Chunk& chunk,
                                     std::size_t sentence_index,
                                     std::string_view marker) {
  if (sentence_index >= chunk.sentences.size()) {
    throw PreconditionError(fmt::format(
        "sentence index {} out of range for chunk of {} sentences",
        sentence_index, chunk.sentences.size()));
  }
  if (marker.empty()) throw PreconditionError("empty highlight marker");
  HighlightedContext hc;
  hc.chunk_index = chunk.chunk_index;
  hc.highlighted_sentence_index = sentence_index;
  hc.marker = std::string(marker);
  hc.chunk_text = chunk.text();
  hc.sentence_text = chunk.sentences[sentence_index].text;
  if (hc.chunk_text.find(marker) != std::string::npos) {
    throw PreconditionError("chunk text already contains the highlight marker");
  }
  std::string& out = hc.rendered_text;
  for (std::size_t i = 0; i < chunk.sentences.size(); ++i) {
    if (i) out.push_back(' ');
    if (i == sentence_index) {
      out.append(marker).push_back(' ');
      out.append(chunk.sentences[i].text).push_back(' ');
      out.append(marker);
    } else {
      out.append(chunk.sentences[i].text);
    }
  }
  return hc;
}

std::string remove_highlights(std::string_view rendered, std::string_view marker) {
  std::string out(rendered);
  const std::size_t open = out.find(marker);
  if (open == std::string::npos) return out;
  std::size_t erase_len = marker.size();
  if (open + erase_len < out.size() && out[open + erase_len] == ' ') ++erase_len;
  out.erase(open, erase_len);
  const std::size_t close = out.find(marker, open);
  if (close == std::string::npos) return out;
  if (close > 0 && out[close - 1] == ' ') {
    out.erase(close - 1, marker.size() + 1);
  } else {
    out.erase(close, marker.size());
  }
  return out;
}

std::optional<AnswerSpan> extract_answer(Backend& backend,
                                         const HighlightedContext& hc,
                                         std::vector<Rejection>* rejections) {
  require(backend, Capability::extract_answer);
  Request req;
  req.task = Task::extract_answer;
  req.context = hc.rendered_text;
  std::string raw = text::collapse_whitespace(backend.run(req));
  if (raw.empty()) return std::nullopt;

  AnswerSpan span;
  span.text = std::move(raw);
  span.found_in_sentence = hc.sentence_text.find(span.text) != std::string::npos;
  span.found_in_chunk =
      span.found_in_sentence || hc.chunk_text.find(span.text) != std::string::npos;
  if (!span.found_in_chunk) {
    spdlog::warn("rejected answer span '{}' (chunk {}, sentence {}): not in chunk",
                 span.text, hc.chunk_index, hc.highlighted_sentence_index);
    if (rejections != nullptr) {
      rejections->push_back({hc.chunk_index, hc.highlighted_sentence_index,
                             span.text, "not found in chunk"});
    }
    return std::nullopt;
  }
  return span;
}

std::string generate_question(Backend& backend, const segmentation::Chunk& chunk,
                              const AnswerSpan& answer) {
  if (!answer.found_in_chunk) {
    throw PreconditionError("answer span is not in the chunk");
  }
  require(backend, Capability::generate_question);
  Request req;
  req.task = Task::generate_question;
  req.context = chunk.text();
  req.answer = answer.text;
  std::string q = text::collapse_whitespace(backend.run(req));
  if (q.empty()) throw BackendError("empty question");
  return q;
}

std::string answer_question(Backend& backend, std::string_view chunk_text,
                            std::string_view question) {
  require(backend, Capability::answer_question);
  if (text::collapse_whitespace(chunk_text).empty()) {
    throw PreconditionError("empty chunk");
  }
  Request req;
  req.task = Task::answer_question;
  req.context = std::string(chunk_text);
  req.question = std::string(question);
  std::string a = text::collapse_whitespace(backend.run(req));
  if (a.empty()) throw BackendError("empty answer");
  return a;
}

std::string summarize_long(Backend& backend, std::string_view input,
                           std::size_t token_limit) {
  require(backend, Capability::summarize);
  const auto& counter = backend.token_counter();
  const auto sentences = segmentation::split_sentences(input, counter);
  if (sentences.empty()) throw PreconditionError("empty input");

  std::size_t total = 0;
  for (const auto& s : sentences) total += s.token_count;
  if (total <= token_limit) {
    return backend.run({Task::summarize, text::collapse_whitespace(input), {}, {}});
  }

  const auto chunks = segmentation::chunk(sentences, token_limit);
  std::vector<std::string> outputs;
  for (const auto& c : chunks) {
    try {
      std::string out =
          text::collapse_whitespace(backend.run({Task::summarize, c.text(), {}, {}}));
      if (!out.empty()) outputs.push_back(std::move(out));
    } catch (const std::exception& e) {
      throw SummarizeError(
          fmt::format("summarize failed on chunk {} of {}: {}", c.chunk_index,
                      chunks.size(), e.what()),
          std::move(outputs), c.chunk_index);
    }
  }
  return text::join(outputs, " ");
}

}  // namespace flashqg::gateway
