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

#include <string>
#include <string_view>
#include <vector>

#include "flashqg/gateway.hpp"
#include "flashqg/segmentation.hpp"
#include "flashqg/text.hpp"

namespace flashqg::gateway {

namespace {

struct Word {
  std::string_view core;  // token without leading/trailing punctuation
  bool leading_punct = false;
  bool trailing_punct = false;
};

bool is_letter(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::vector<Word> words_of(std::string_view s) {
  std::vector<Word> out;
  for (std::string_view tok : text::split_whitespace(s)) {
    Word w;
    std::size_t b = 0;
    std::size_t e = tok.size();
    while (b < e && text::is_punct(tok[b])) ++b;
    while (e > b && text::is_punct(tok[e - 1])) --e;
    w.core = tok.substr(b, e - b);
    w.leading_punct = b > 0;
    w.trailing_punct = e < tok.size();
    out.push_back(w);
  }
  return out;
}

// Capitalized alphabetic word; internal hyphens and apostrophes allowed.
bool is_capitalized(std::string_view w) {
  if (w.empty() || !text::is_upper(w.front())) return false;
  for (char c : w) {
    if (!is_letter(c) && c != '-' && c != '\'') return false;
  }
  return true;
}

struct Run {
  std::size_t start = 0;
  std::size_t length = 0;
};

// Maximal runs of capitalized words not interrupted by punctuation.
std::vector<Run> capitalized_runs(const std::vector<Word>& words) {
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < words.size()) {
    if (!is_capitalized(words[i].core)) {
      ++i;
      continue;
    }
    Run r{i, 1};
    while (i + r.length < words.size() && !words[i + r.length - 1].trailing_punct &&
           !words[i + r.length].leading_punct &&
           is_capitalized(words[i + r.length].core)) {
      ++r.length;
    }
    runs.push_back(r);
    i += r.length;
  }
  return runs;
}

std::string render(const std::vector<Word>& words, Run r) {
  std::string out;
  for (std::size_t i = r.start; i < r.start + r.length; ++i) {
    if (!out.empty()) out.push_back(' ');
    out.append(words[i].core);
  }
  return out;
}

std::string longest_word(const std::vector<Word>& words) {
  std::string_view best;
  for (const auto& w : words) {
    if (w.core.size() > best.size()) best = w.core;
  }
  return std::string(best);
}

std::string_view highlighted_sentence(std::string_view rendered,
                                      std::string_view marker) {
  const std::size_t open = rendered.find(marker);
  if (open == std::string_view::npos) return rendered;
  const std::size_t from = open + marker.size();
  const std::size_t close = rendered.find(marker, from);
  if (close == std::string_view::npos) return rendered.substr(from);
  return rendered.substr(from, close - from);
}

std::string fake_extract(std::string_view sentence) {
  const auto words = words_of(sentence);
  const auto runs = capitalized_runs(words);
  for (const auto& r : runs) {
    if (r.start > 0) return render(words, r);
  }
  if (!runs.empty() && runs.front().length >= 2) return render(words, runs.front());
  return longest_word(words);
}

std::string fake_answer(std::string_view context) {
  const auto words = words_of(context);
  const auto runs = capitalized_runs(words);
  if (!runs.empty()) return render(words, runs.front());
  return longest_word(words);
}

}  // namespace

FakeBackend::FakeBackend() {
  descriptor_.name = "fake";
  descriptor_.kind = BackendKind::fake;
  descriptor_.capabilities = {Capability::extract_answer, Capability::generate_question,
                              Capability::answer_question, Capability::summarize,
                              Capability::count_tokens};
  descriptor_.highlight_marker = "⟨hl⟩";
  descriptor_.config = {{"decoding", "deterministic rules"}};
}

std::string FakeBackend::run(const Request& request) {
  switch (request.task) {
    case Task::extract_answer:
      return fake_extract(
          highlighted_sentence(request.context, descriptor_.highlight_marker));
    case Task::generate_question:
      return "What is " + request.answer + "?";
    case Task::answer_question:
      return fake_answer(request.context);
    case Task::summarize: {
      const auto sentences = segmentation::split_sentences(request.context);
      return sentences.empty() ? std::string() : sentences.front().text;
    }
  }
  return {};
}

}  // namespace flashqg::gateway
