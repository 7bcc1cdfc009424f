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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flashqg::segmentation {

/// Model input budget a passage is split against.
inline constexpr std::size_t kDefaultTokenLimit = 512;

/// Tokens held back from the budget at chunking time so that the two
/// highlight markers added later never push a chunk over the model limit.
inline constexpr std::size_t kHighlightMargin = 8;

class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

class WhitespaceTokenCounter final : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

const TokenCounter& whitespace_counter();

struct Sentence {
  std::string text;
  std::size_t index = 0;
  std::size_t token_count = 0;

  bool operator==(const Sentence&) const = default;
};

struct Chunk {
  std::vector<Sentence> sentences;
  std::size_t total_tokens = 0;
  std::size_t chunk_index = 0;
  /// A single sentence that alone exceeds the token limit.
  bool oversized = false;

  /// Member sentences joined by single spaces.
  std::string text() const;

  bool operator==(const Chunk&) const = default;
};

/// Sentence boundaries fall after '.', '!' or '?' (optionally followed by
/// closing quotes/brackets) when the next token starts with an uppercase
/// letter, unless the token is a known abbreviation such as "Fig." or "e.g.".
/// Whitespace is collapsed first; joining the result with single spaces gives
/// back the collapsed input.
std::vector<Sentence> split_sentences(
    std::string_view text, const TokenCounter& counter = whitespace_counter());

/// True if `token` (a whitespace-free word) is on the abbreviation stop-list.
bool is_abbreviation(std::string_view token);

/// Groups sentences into contiguous chunks of at most `token_limit` tokens.
///
/// For a run of n sentences the smallest k is chosen such that splitting the
/// run into k groups of ceil(n/k) and floor(n/k) sentences (larger groups
/// first) keeps every group within the limit. A sentence that alone exceeds
/// the limit becomes its own chunk flagged `oversized`; the runs between such
/// sentences are chunked independently. Chunk indices number the output.
///
/// Throws PreconditionError if token_limit < 1.
std::vector<Chunk> chunk(std::span<const Sentence> sentences,
                         std::size_t token_limit = kDefaultTokenLimit);

}  // namespace flashqg::segmentation
