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

#include "flashqg/segmentation.hpp"

#include <algorithm>
#include <array>

#include "flashqg/error.hpp"
#include "flashqg/text.hpp"

namespace flashqg::segmentation {

namespace {

constexpr std::array<std::string_view, 24> kAbbreviations = {
    "e.g.", "i.e.", "fig.", "figs.", "eq.",  "eqs.",  "sec.",  "ch.",
    "cf.",  "vs.",  "al.",  "dr.",   "mr.",  "mrs.",  "ms.",   "prof.",
    "no.",  "vol.", "pp.",  "approx.", "resp.", "ca.", "st.", "jr."};

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Token ends a sentence, ignoring trailing closing quotes/brackets.
bool ends_with_terminator(std::string_view tok) {
  while (!tok.empty() && is_closer(tok.back())) tok.remove_suffix(1);
  if (tok.empty()) return false;
  const char c = tok.back();
  return c == '.' || c == '!' || c == '?';
}

bool starts_sentence(std::string_view tok) {
  while (!tok.empty() && is_opener(tok.front())) tok.remove_prefix(1);
  return !tok.empty() && text::is_upper(tok.front());
}

// Sizes of the balanced partition of n items into k groups, larger first.
std::vector<std::size_t> balanced_sizes(std::size_t n, std::size_t k) {
  const std::size_t q = n / k;
  const std::size_t r = n % k;
  std::vector<std::size_t> sizes(k, q);
  for (std::size_t i = 0; i < r; ++i) ++sizes[i];
  return sizes;
}

void chunk_run(std::span<const Sentence> run, std::size_t limit,
               std::vector<Chunk>& out) {
  const std::size_t n = run.size();
  if (n == 0) return;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto sizes = balanced_sizes(n, k);
    bool fits = true;
    std::size_t pos = 0;
    for (std::size_t size : sizes) {
      std::size_t total = 0;
      for (std::size_t i = pos; i < pos + size; ++i) total += run[i].token_count;
      pos += size;
      if (total > limit) {
        fits = false;
        break;
      }
    }
    if (!fits) continue;
    pos = 0;
    for (std::size_t size : sizes) {
      Chunk c;
      c.sentences.assign(run.begin() + pos, run.begin() + pos + size);
      for (const auto& s : c.sentences) c.total_tokens += s.token_count;
      out.push_back(std::move(c));
      pos += size;
    }
    return;
  }
  // Unreachable: every sentence in a run fits on its own, so k = n succeeds.
}

}  // namespace

std::size_t WhitespaceTokenCounter::count(std::string_view text) const {
  return text::split_whitespace(text).size();
}

const TokenCounter& whitespace_counter() {
  static const WhitespaceTokenCounter counter;
  return counter;
}

std::string Chunk::text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out.append(s.text);
  }
  return out;
}

bool is_abbreviation(std::string_view token) {
  while (!token.empty() && is_opener(token.front())) token.remove_prefix(1);
  const std::string folded = text::casefold(token);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), folded) !=
         kAbbreviations.end();
}

std::vector<Sentence> split_sentences(std::string_view input,
                                      const TokenCounter& counter) {
  const std::string normalized = text::collapse_whitespace(input);
  const auto tokens = text::split_whitespace(normalized);
  std::vector<Sentence> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    Sentence s;
    s.index = out.size();
    s.token_count = std::max<std::size_t>(1, counter.count(current));
    s.text = std::move(current);
    out.push_back(std::move(s));
    current.clear();
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!current.empty()) current.push_back(' ');
    current.append(tokens[i]);
    const bool boundary = i + 1 < tokens.size() &&
                          ends_with_terminator(tokens[i]) &&
                          !is_abbreviation(tokens[i]) &&
                          starts_sentence(tokens[i + 1]);
    if (boundary) flush();
  }
  flush();
  return out;
}

std::vector<Chunk> chunk(std::span<const Sentence> sentences,
                         std::size_t token_limit) {
  if (token_limit < 1) throw PreconditionError("token_limit must be >= 1");
  std::vector<Chunk> out;
  std::size_t run_start = 0;
  for (std::size_t i = 0; i <= sentences.size(); ++i) {
    const bool at_end = i == sentences.size();
    if (!at_end && sentences[i].token_count <= token_limit) continue;
    chunk_run(sentences.subspan(run_start, i - run_start), token_limit, out);
    if (!at_end) {
      Chunk big;
      big.sentences.push_back(sentences[i]);
      big.total_tokens = sentences[i].token_count;
      big.oversized = true;
      out.push_back(std::move(big));
    }
    run_start = i + 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].chunk_index = i;
  return out;
}

}  // namespace flashqg::segmentation
