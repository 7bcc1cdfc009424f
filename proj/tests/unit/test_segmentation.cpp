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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "flashqg/error.hpp"
#include "flashqg/segmentation.hpp"
#include "oracles/chunk_oracle.hpp"

using namespace flashqg;
using namespace flashqg::segmentation;

namespace {

std::vector<Sentence> with_tokens(const std::vector<std::size_t>& counts) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.push_back({"s" + std::to_string(i) + ".", i, counts[i]});
  }
  return out;
}

std::vector<std::vector<std::size_t>> member_indices(const std::vector<Chunk>& chunks) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : chunks) {
    out.emplace_back();
    for (const auto& s : c.sentences) out.back().push_back(s.index);
  }
  return out;
}

}  // namespace

TEST_CASE("split_sentences on simple text") {
  const auto s = split_sentences("A cat sat. It slept.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "A cat sat.");
  CHECK(s[1].text == "It slept.");
  CHECK(s[0].index == 0);
  CHECK(s[1].index == 1);
  CHECK(s[0].token_count == 3);
}

TEST_CASE("split_sentences respects the abbreviation stop-list") {
  const auto s = split_sentences("See Fig. 2 for details. Next point.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "See Fig. 2 for details.");

  CHECK(split_sentences("Use a tool, e.g. The grep tool. Done.").size() == 2);
  CHECK(split_sentences("As in Eq. Five we see. More.").size() == 2);
}

TEST_CASE("split_sentences edge cases") {
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   \n ").empty());
  // No split before a lowercase word or a digit.
  CHECK(split_sentences("It ended. then more. 3 items.").size() == 1);
  // Question and exclamation marks, closing quotes.
  CHECK(split_sentences("Why? Because! \"Quoted.\" Then end.").size() == 4);
  // Whitespace is normalized, and joining restores the normalized input.
  const auto s = split_sentences("One  two.\n\nThree   four.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text + " " + s[1].text == "One two. Three four.");
}

TEST_CASE("split_sentences is lossless on normalized input") {
  std::mt19937 rng(7);
  const std::vector<std::string> words = {"Alpha", "beta", "e.g.", "Fig.", "end.", "Why?",
                                          "go!",   "x",    "(Yes)", "\"Q.\"", "Next", "no."};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      if (i) text += (rng() % 4 == 0) ? "  \n" : " ";
      text += words[rng() % words.size()];
    }
    const auto sentences = split_sentences(text);
    std::string joined;
    for (const auto& s : sentences) {
      CHECK_FALSE(s.text.empty());
      CHECK(s.token_count >= 1);
      if (!joined.empty()) joined += ' ';
      joined += s.text;
    }
    CHECK(joined == [&] {
      std::string out;
      std::istringstream in(text);
      std::string w;
      while (in >> w) out += (out.empty() ? "" : " ") + w;
      return out;
    }());
  }
}

TEST_CASE("chunk: everything fits in one chunk") {
  const auto sentences = with_tokens({100, 100, 100});
  const auto chunks = chunk(sentences, 512);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].sentences.size() == 3);
  CHECK(chunks[0].total_tokens == 300);
  CHECK_FALSE(chunks[0].oversized);
}

TEST_CASE("chunk: 3 x 200 tokens splits (2, 1)") {
  const std::vector<std::size_t> tokens = {200, 200, 200};
  // Frozen from the brute-force oracle.
  const auto expected = oracle::brute_force_chunk(tokens, 512);
  REQUIRE(expected.size() == 2);
  REQUIRE(expected[0].members.size() == 2);
  REQUIRE(expected[1].members.size() == 1);

  const auto chunks = chunk(with_tokens(tokens), 512);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].sentences.size() == 2);
  CHECK(chunks[1].sentences.size() == 1);
  CHECK(chunks[0].total_tokens == 400);
  CHECK(chunks[1].total_tokens == 200);
  CHECK(chunks[0].chunk_index == 0);
  CHECK(chunks[1].chunk_index == 1);
}

TEST_CASE("chunk: oversized sentence becomes a flagged chunk") {
  auto chunks = chunk(with_tokens({600}), 512);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].oversized);
  CHECK(chunks[0].total_tokens == 600);

  chunks = chunk(with_tokens({300, 300, 700, 10, 10}), 512);
  REQUIRE(chunks.size() == 4);
  CHECK(member_indices(chunks) ==
        std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {3, 4}});
  CHECK(chunks[2].oversized);
  CHECK_FALSE(chunks[3].oversized);
}

TEST_CASE("chunk: degenerate inputs") {
  CHECK(chunk(std::vector<Sentence>{}, 512).empty());
  CHECK_THROWS_AS(chunk(with_tokens({1}), 0), PreconditionError);
}

TEST_CASE("chunk: balanced profile, larger groups first") {
  // 7 sentences of 100 tokens, limit 250: k = 4 gives sizes (2, 2, 2, 1).
  const auto chunks = chunk(with_tokens(std::vector<std::size_t>(7, 100)), 250);
  REQUIRE(chunks.size() == 4);
  CHECK(chunks[0].sentences.size() == 2);
  CHECK(chunks[3].sentences.size() == 1);
}

TEST_CASE("chunk properties: lossless, balanced, minimal, deterministic") {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = rng() % 13;
    const std::size_t limit = 1 + rng() % 600;
    std::vector<std::size_t> tokens(n);
    for (auto& t : tokens) t = 1 + rng() % limit;  // nothing oversized
    const auto sentences = with_tokens(tokens);
    const auto chunks = chunk(sentences, limit);

    std::vector<Sentence> flat;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& c : chunks) {
      std::size_t sum = 0;
      for (const auto& s : c.sentences) sum += s.token_count;
      CHECK(sum == c.total_tokens);
      CHECK(c.total_tokens <= limit);
      lo = std::min(lo, c.sentences.size());
      hi = std::max(hi, c.sentences.size());
      flat.insert(flat.end(), c.sentences.begin(), c.sentences.end());
    }
    CHECK(flat == sentences);
    if (!chunks.empty()) CHECK(hi - lo <= 1);
    CHECK(chunks.size() == oracle::brute_force_chunk(tokens, limit).size());
    CHECK(chunk(sentences, limit) == chunks);
  }
}
