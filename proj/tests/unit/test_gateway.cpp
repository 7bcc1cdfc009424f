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

#include <httplib.h>

#include <cstdlib>
#include <random>
#include <thread>

#include "flashqg/gateway.hpp"

using namespace flashqg;
using namespace flashqg::gateway;
using segmentation::Chunk;

namespace {

Chunk chunk_of(const std::string& text) {
  Chunk c;
  c.sentences = segmentation::split_sentences(text);
  for (const auto& s : c.sentences) c.total_tokens += s.token_count;
  return c;
}

// Returns canned outputs and records requests.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::string output, std::set<Capability> caps = {
                                                   Capability::extract_answer,
                                                   Capability::generate_question,
                                                   Capability::answer_question,
                                                   Capability::summarize})
      : output_(std::move(output)) {
    desc_.name = "scripted";
    desc_.kind = BackendKind::plugin;
    desc_.capabilities = std::move(caps);
  }
  const BackendDescriptor& descriptor() const override { return desc_; }
  std::string run(const Request& r) override {
    requests.push_back(r);
    if (fail_after && requests.size() > *fail_after) throw BackendError("boom");
    return output_;
  }
  std::vector<Request> requests;
  std::optional<std::size_t> fail_after;

 private:
  BackendDescriptor desc_;
  std::string output_;
};

const std::string kHl = "⟨hl⟩";

}  // namespace

TEST_CASE("insert_highlights wraps exactly one sentence") {
  const auto c = chunk_of("A cat sat. It slept.");
  const auto hc = insert_highlights(c, 1, kHl);
  CHECK(hc.rendered_text == "A cat sat. ⟨hl⟩ It slept. ⟨hl⟩");
  CHECK(hc.sentence_text == "It slept.");
  CHECK(hc.highlighted_sentence_index == 1);

  const auto one = chunk_of("Only one sentence here.");
  CHECK(insert_highlights(one, 0, kHl).rendered_text == "⟨hl⟩ Only one sentence here. ⟨hl⟩");

  CHECK_THROWS_AS(insert_highlights(c, 5, kHl), PreconditionError);
  CHECK_THROWS_AS(insert_highlights(chunk_of("Has ⟨hl⟩ inside."), 0, kHl), PreconditionError);
}

TEST_CASE("remove_highlights inverts insert_highlights") {
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"Alpha", "beta.", "Gamma", "delta?", "x", "Yes!"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) text += (i ? " " : "") + words[rng() % words.size()];
    const auto c = chunk_of(text);
    for (const std::string marker : {std::string("⟨hl⟩"), std::string("<hl>")}) {
      for (std::size_t i = 0; i < c.sentences.size(); ++i) {
        const auto hc = insert_highlights(c, i, marker);
        CHECK(remove_highlights(hc.rendered_text, marker) == c.text());
      }
    }
  }
}

TEST_CASE("fake backend extract_answer rules") {
  FakeBackend fake;
  auto extract = [&](const std::string& text, std::size_t index = 0) {
    return extract_answer(fake, insert_highlights(chunk_of(text), index, kHl));
  };

  auto a = extract("Dynamic Programming was introduced in 1957.");
  REQUIRE(a);
  CHECK(a->text == "Dynamic Programming");
  CHECK(a->found_in_sentence);
  CHECK(a->found_in_chunk);

  a = extract("the cat sat there.");
  REQUIRE(a);
  CHECK(a->text == "there");

  // A single capitalized word at position 0 is just sentence case.
  a = extract("It solves subproblems.");
  REQUIRE(a);
  CHECK(a->text == "subproblems");

  // A later run wins over the sentence-initial one.
  a = extract("The method of Wagner Fischer fills a table.");
  REQUIRE(a);
  CHECK(a->text == "Wagner Fischer");

  // Punctuation breaks a run.
  a = extract("We used Laplace, Kneser-Ney and others.");
  REQUIRE(a);
  CHECK(a->text == "Laplace");

  // Only the highlighted sentence is considered.
  a = extract("First Sentence Here. It has words.", 1);
  REQUIRE(a);
  CHECK(a->text == "words");
}

TEST_CASE("extract_answer rejects spans absent from the chunk") {
  ScriptedBackend backend("hallucinated span");
  std::vector<Rejection> log;
  const auto hc = insert_highlights(chunk_of("A cat sat. It slept."), 0, kHl);
  CHECK_FALSE(extract_answer(backend, hc, &log));
  REQUIRE(log.size() == 1);
  CHECK(log[0].span == "hallucinated span");

  // In the chunk but outside the highlighted sentence.
  ScriptedBackend other("slept");
  const auto span = extract_answer(other, hc);
  REQUIRE(span);
  CHECK_FALSE(span->found_in_sentence);
  CHECK(span->found_in_chunk);

  ScriptedBackend empty("   ");
  CHECK_FALSE(extract_answer(empty, hc));

  ScriptedBackend no_caps("x", {Capability::summarize});
  CHECK_THROWS_WITH_AS(extract_answer(no_caps, hc), doctest::Contains("unsupported"),
                       BackendError);
}

TEST_CASE("generate_question with the fake backend") {
  FakeBackend fake;
  const auto c = chunk_of("Dynamic Programming was introduced in 1957.");
  CHECK(generate_question(fake, c, {"Dynamic Programming", true, true}) ==
        "What is Dynamic Programming?");
  CHECK(generate_question(fake, c, {"1957", true, true}) == "What is 1957?");
  CHECK_THROWS_AS(generate_question(fake, c, {"absent", false, false}), PreconditionError);

  ScriptedBackend blank("");
  CHECK_THROWS_WITH_AS(generate_question(blank, c, {"1957", true, true}), "empty question",
                       BackendError);
}

TEST_CASE("answer_question with the fake backend") {
  FakeBackend fake;
  CHECK(answer_question(fake, "Dynamic Programming was introduced in 1957.", "When?") ==
        "Dynamic Programming");
  CHECK(answer_question(fake, "all lower case words here.", "What?") == "lower");
  CHECK_THROWS_AS(answer_question(fake, "", "What?"), PreconditionError);
  ScriptedBackend no_qa("x", {Capability::extract_answer});
  CHECK_THROWS_WITH_AS(answer_question(no_qa, "Some text.", "Q?"),
                       doctest::Contains("unsupported"), BackendError);
}

TEST_CASE("summarize_long") {
  FakeBackend fake;
  // Under the limit: one call, verbatim output.
  ScriptedBackend scripted("  verbatim  output ");
  CHECK(summarize_long(scripted, "One two. Three four.", 512) == "  verbatim  output ");
  CHECK(scripted.requests.size() == 1);

  // 6 sentences of 4 tokens, limit 12: two chunks of 3, lead-1 of each.
  const std::string text =
      "Aa bb cc dd. Ee ff gg hh. Ii jj kk ll. Mm nn oo qq. Rr ss tt uu. Vv ww xx yy.";
  CHECK(summarize_long(fake, text, 12) == "Aa bb cc dd. Mm nn oo qq.");

  CHECK_THROWS_WITH_AS(summarize_long(fake, "  ", 12), "empty input", PreconditionError);

  ScriptedBackend flaky("sum.");
  flaky.fail_after = 1;
  try {
    summarize_long(flaky, text, 12);
    FAIL("expected SummarizeError");
  } catch (const SummarizeError& e) {
    CHECK(e.partial() == std::vector<std::string>{"sum."});
    CHECK(e.failed_chunk() == 1);
  }
}

TEST_CASE("fake backend is referentially transparent") {
  FakeBackend a;
  FakeBackend b;
  const Request r{Task::extract_answer, "x ⟨hl⟩ The Big Idea is here. ⟨hl⟩", "", ""};
  CHECK(a.run(r) == b.run(r));
  CHECK(a.run(r) == a.run(r));
}

TEST_CASE("http backend speaks the /v1/generate contract") {
  httplib::Server server;
  std::vector<nlohmann::json> seen;
  std::mutex mu;
  server.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    {
      std::lock_guard lock(mu);
      seen.push_back(body);
    }
    const auto task = body.at("task").get<std::string>();
    if (task == "summarize" && body["input"] == "fail") {
      res.status = 503;
      return;
    }
    std::string out = task == "generate_question" ? "Q about " + body["answer"].get<std::string>()
                                                  : "cat";
    res.set_content(nlohmann::json{{"output", out}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });

  HttpBackendOptions opts;
  opts.base_url = "http://127.0.0.1:" + std::to_string(port);
  HttpBackend http(opts);
  CHECK(http.descriptor().highlight_marker == "<hl>");
  CHECK_FALSE(http.descriptor().supports(Capability::count_tokens));

  const auto c = chunk_of("A cat sat. It slept.");
  const auto hc = insert_highlights(c, 0, http.descriptor().highlight_marker);
  const auto span = extract_answer(http, hc);
  REQUIRE(span);
  CHECK(span->text == "cat");
  CHECK(generate_question(http, c, *span) == "Q about cat");
  CHECK(answer_question(http, c.text(), "Who sat?") == "cat");
  CHECK_THROWS_AS(http.run({Task::summarize, "fail", "", ""}), BackendError);

  REQUIRE(seen.size() == 4);
  CHECK(seen[0] == nlohmann::json{{"task", "extract_answer"}, {"input", "<hl> A cat sat. <hl> It slept."}});
  CHECK(seen[1] == nlohmann::json{{"task", "generate_question"}, {"input", "A cat sat. It slept."},
                                  {"answer", "cat"}});
  CHECK(seen[2]["task"] == "answer_question");
  CHECK(seen[2]["input"] == "question: Who sat? context: A cat sat. It slept.");
  CHECK_FALSE(seen[2].contains("answer"));

  server.stop();
  t.join();

  // Nothing listening any more.
  CHECK_THROWS_AS(http.run({Task::summarize, "x", "", ""}), BackendError);
}

TEST_CASE("backend registry") {
  CHECK(make_backend("fake")->descriptor().kind == BackendKind::fake);
  CHECK_THROWS_AS(make_backend("nope"), NotFoundError);
  register_backend("scripted", [] { return std::make_unique<ScriptedBackend>("x"); });
  CHECK(make_backend("scripted")->descriptor().name == "scripted");
  ::unsetenv("QG_BACKEND_URL");
  CHECK_THROWS_AS(make_backend("http"), Error);
  ::setenv("QG_BACKEND_URL", "http://127.0.0.1:1", 1);
  CHECK(make_backend("http")->descriptor().config["url"] == "http://127.0.0.1:1");
}
