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

#include <algorithm>
#include <random>

#include "flashqg/metrics.hpp"
#include "oracles/kappa_oracle.hpp"

using namespace flashqg;
using namespace flashqg::metrics;
using pipeline::QAPair;
using pipeline::QuestionSet;
using pipeline::SourceKind;

namespace {

constexpr auto Y = Judgment::yes;
constexpr auto N = Judgment::no;
constexpr auto S = Judgment::skipped;

QAPair qa(std::string id, std::string q, std::string a, SourceKind kind = SourceKind::original,
          std::string chapter = "ch2") {
  QAPair p;
  p.pair_id = std::move(id);
  p.question = std::move(q);
  p.answer = std::move(a);
  p.source_kind = kind;
  p.chapter_id = std::move(chapter);
  return p;
}

std::vector<corpus::KeyTerm> terms(std::initializer_list<const char*> surfaces) {
  std::vector<corpus::KeyTerm> out;
  for (const char* s : surfaces) out.push_back({s, "ch2"});
  return out;
}

std::vector<bool> random_votes(std::mt19937_64& rng, std::size_t n) {
  std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
  std::vector<bool> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = coin(rng);
  return v;
}

double kappa_of(const std::vector<bool>& a, const std::vector<bool>& b) {
  std::unique_ptr<bool[]> pa(new bool[a.size()]);
  std::unique_ptr<bool[]> pb(new bool[b.size()]);
  std::copy(a.begin(), a.end(), pa.get());
  std::copy(b.begin(), b.end(), pb.get());
  return cohen_kappa({pa.get(), a.size()}, {pb.get(), b.size()});
}

}  // namespace

TEST_CASE("key_term_coverage examples") {
  QuestionSet qs;
  qs.pairs = {qa("p1", "What is edit distance?", "smoothing")};
  const auto r = key_term_coverage(qs, terms({"edit distance", "smoothing"}));
  CHECK(r.pct_in_questions == 0.5);
  CHECK(r.pct_in_answers == 0.5);
  CHECK(r.pct_in_either == 1.0);
  CHECK(r.n == 1);
  REQUIRE(r.per_term.size() == 2);
  CHECK(r.per_term[0].in_q);
  CHECK_FALSE(r.per_term[0].in_a);

  const auto zero = key_term_coverage(qs, terms({"perplexity"}));
  CHECK(zero.pct_in_questions == 0.0);
  CHECK(zero.pct_in_answers == 0.0);
  CHECK(zero.pct_in_either == 0.0);

  CHECK_THROWS_WITH_AS(key_term_coverage(qs, {}), "no key terms", PreconditionError);
}

TEST_CASE("coverage matching ignores case and spacing") {
  QuestionSet qs;
  qs.pairs = {qa("p1", "What does  EDIT\nDistance measure?", "x")};
  CHECK(key_term_coverage(qs, terms({"edit distance"})).pct_in_questions == 1.0);
  CHECK(key_term_coverage(qs, terms({"Edit  Distance"})).pct_in_questions == 1.0);
}

TEST_CASE("coverage is monotone under pair addition") {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "epsilon",
                                          "zeta", "eta", "theta"};
  const auto kt = terms({"alpha beta", "gamma", "delta", "zeta eta", "theta", "iota"});
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    QuestionSet qs;
    CoverageReport prev = key_term_coverage(qs, kt);
    for (int step = 0; step < 15; ++step) {
      auto word = [&] { return vocab[rng() % vocab.size()]; };
      qs.pairs.push_back(qa("p" + std::to_string(step), word() + " " + word(), word()));
      const auto cur = key_term_coverage(qs, kt);
      CHECK(cur.pct_in_questions >= prev.pct_in_questions);
      CHECK(cur.pct_in_answers >= prev.pct_in_answers);
      CHECK(cur.pct_in_either >= prev.pct_in_either);
      CHECK(cur.pct_in_either >= std::max(cur.pct_in_questions, cur.pct_in_answers));
      CHECK(cur.pct_in_either <= 1.0);
      prev = cur;
    }
  }
}

TEST_CASE("expand_annotation") {
  CHECK(expand_annotation(AnnotationLabel::of(Y, S, S, S, S)) ==
        AnnotationLabel::of(Y, Y, Y, Y, Y));
  // Explicit answers under acceptable=yes are still overridden.
  CHECK(expand_annotation(AnnotationLabel::of(Y, N, S, Y, S)) ==
        AnnotationLabel::of(Y, Y, Y, Y, Y));
  const auto full = AnnotationLabel::of(N, Y, N, Y, Y);
  CHECK(expand_annotation(full) == full);
  CHECK_THROWS_AS(expand_annotation(AnnotationLabel::of(N, S, S, S, S)), PreconditionError);
  CHECK_THROWS_AS(expand_annotation(AnnotationLabel::of(N, S, Y, Y, Y)), PreconditionError);
  CHECK_THROWS_AS(expand_annotation(AnnotationLabel::of(S, Y, Y, Y, Y)), PreconditionError);
  try {
    expand_annotation(AnnotationLabel::of(N, Y, S, Y, Y));
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).rfind("incomplete annotation", 0) == 0);
  }
}

TEST_CASE("expand_annotation over every raw label") {
  const std::array<Judgment, 3> all = {Y, N, S};
  std::size_t valid = 0;
  for (int code = 0; code < 243; ++code) {
    AnnotationLabel raw;
    int c = code;
    for (auto& v : raw.values) {
      v = all[c % 3];
      c /= 3;
    }
    const bool ok_expected =
        raw.values[0] == Y ||
        (raw.values[0] == N &&
         std::none_of(raw.values.begin() + 1, raw.values.end(), [](Judgment j) { return j == S; }));
    if (!ok_expected) {
      CHECK_THROWS_AS(expand_annotation(raw), PreconditionError);
      continue;
    }
    ++valid;
    const auto e = expand_annotation(raw);
    CHECK(std::none_of(e.values.begin(), e.values.end(), [](Judgment j) { return j == S; }));
    CHECK(expand_annotation(e) == e);
  }
  CHECK(valid == 81 + 16);
}

TEST_CASE("majority_vote") {
  const auto yes = AnnotationLabel::of(Y, Y, Y, Y, Y);
  const auto no = AnnotationLabel::of(N, N, N, N, N);
  const std::array<AnnotationLabel, 3> yyn{yes, yes, no};
  const std::array<AnnotationLabel, 3> nny{no, no, yes};
  CHECK(majority_vote(yyn, Category::acceptable));
  CHECK_FALSE(majority_vote(nny, Category::relevant));
  const std::array<AnnotationLabel, 2> two{yes, yes};
  CHECK_THROWS_AS(majority_vote(two, Category::acceptable), PreconditionError);
  const std::array<AnnotationLabel, 3> raw{AnnotationLabel::of(Y, S, S, S, S), yes, yes};
  CHECK_THROWS_AS(majority_vote(raw, Category::correct), PreconditionError);

  // All 2^3 patterns, every category, every permutation.
  for (Category cat : kCategories) {
    for (int mask = 0; mask < 8; ++mask) {
      std::array<AnnotationLabel, 3> trio{no, no, no};
      int count = 0;
      for (int k = 0; k < 3; ++k) {
        if (mask & (1 << k)) {
          trio[static_cast<std::size_t>(k)][cat] = Y;
          ++count;
        }
      }
      const bool expected = count >= 2;
      std::array<int, 3> perm{0, 1, 2};
      do {
        const std::array<AnnotationLabel, 3> p{trio[perm[0]], trio[perm[1]], trio[perm[2]]};
        CHECK(majority_vote(p, cat) == expected);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
}

TEST_CASE("cohen_kappa examples") {
  CHECK(kappa_of({true, true, false, false}, {true, false, false, true}) == 0.0);
  const auto hand = oracle::tabulate({true, true, false, false}, {true, false, false, true});
  CHECK(oracle::kappa_from_table(hand) == 0.0);

  CHECK(kappa_of({true, false, true}, {true, false, true}) == 1.0);
  CHECK(kappa_of({true, false}, {false, true}) == -1.0);

  // Degenerate: both constant on the same class.
  bool yes4[] = {true, true, true, true};
  const auto d = cohen_kappa_detail(yes4, yes4);
  CHECK(d.degenerate);
  CHECK(d.value == 1.0);
  // One rater constant, the other not: p_e < 1, no special case.
  bool mixed[] = {true, false, true, true};
  const auto m = cohen_kappa_detail(yes4, mixed);
  CHECK_FALSE(m.degenerate);
  CHECK(m.value == 0.0);

  bool three[] = {true, true, false};
  CHECK_THROWS_AS(cohen_kappa(yes4, three), PreconditionError);
  CHECK_THROWS_AS(cohen_kappa(std::span<const bool>{}, std::span<const bool>{}),
                  PreconditionError);
}

TEST_CASE("cohen_kappa matches the contingency-table oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const auto a = random_votes(rng, n);
    const auto b = trial % 5 == 0 ? a : random_votes(rng, n);
    const double k = kappa_of(a, b);
    const double expected = oracle::kappa_from_table(oracle::tabulate(a, b));
    CHECK(std::abs(k - expected) <= 1e-12);
    CHECK(k == kappa_of(b, a));
    CHECK(k >= -1.0);
    CHECK(k <= 1.0);
    const auto t = oracle::tabulate(a, b);
    const double po = (t.table[0][0] + t.table[1][1]) / t.total;
    CHECK(k <= po + 1e-12);
    const bool both_classes = std::count(a.begin(), a.end(), true) > 0 &&
                              std::count(a.begin(), a.end(), false) > 0;
    if (a == b && both_classes) CHECK(k == 1.0);
  }
}

TEST_CASE("label and record JSON") {
  const auto l = AnnotationLabel::of(N, Y, S, Y, N);
  CHECK(label_from_json(to_json(l)) == l);
  CHECK(label_from_json(nlohmann::json::parse(R"({"acceptable": true})")) ==
        AnnotationLabel::of(Y, S, S, S, S));
  CHECK_THROWS_AS(label_from_json(nlohmann::json::parse(R"({"acceptable": "maybe"})")),
                  PreconditionError);

  AnnotationRecord r{"p1", "A1", l, "2026-01-01T00:00:00Z", 3};
  const auto back = record_from_json(to_json(r));
  CHECK(back.pair_id == "p1");
  CHECK(back.annotator_id == "A1");
  CHECK(back.label == l);
  CHECK(back.revision == 3);
}

TEST_CASE("round_pct is half away from zero at one decimal") {
  CHECK(round_pct(0.7085) == doctest::Approx(70.9));
  CHECK(round_pct(0.70849) == doctest::Approx(70.8));
  CHECK(round_pct(1.0 / 3.0) == doctest::Approx(33.3));
  CHECK(round_pct(0.0005) == doctest::Approx(0.1));
  CHECK(format_pct(209.0 / 300.0) == "69.7");
  CHECK(format_pct(0.0) == "0.0");
  CHECK(format_pct(1.0) == "100.0");
}

namespace {

struct ReportFixture {
  pipeline::EvalSet eval;
  std::vector<QuestionSet> sets;
  std::vector<AnnotationRecord> records;

  ReportFixture() {
    QuestionSet orig;
    orig.source_kind = SourceKind::original;
    QuestionSet hum;
    hum.source_kind = SourceKind::human_summary;
    for (int i = 0; i < 4; ++i) {
      orig.pairs.push_back(qa("o" + std::to_string(i), "q", "a", SourceKind::original,
                              i < 2 ? "ch2" : "ch3"));
      hum.pairs.push_back(qa("h" + std::to_string(i), "q", "a", SourceKind::human_summary,
                             "ch2"));
      eval.entries.push_back("o" + std::to_string(i));
      eval.entries.push_back("h" + std::to_string(i));
    }
    eval.eval_id = "eval-test";
    sets = {orig, hum};
  }

  void add(const std::string& pid, const std::string& who, AnnotationLabel l,
           std::size_t rev = 1) {
    records.push_back({pid, who, l, "t", rev});
  }
};

}  // namespace

TEST_CASE("agreement_report saturated case") {
  ReportFixture f;
  for (const auto& pid : f.eval.entries) {
    for (const char* a : {"A1", "A2", "A3"}) f.add(pid, a, AnnotationLabel::of(Y, S, S, S, S));
  }
  const auto rep = agreement_report(f.records, f.eval, f.sets);
  CHECK(rep.n_items == 8);
  CHECK(rep.annotators == std::vector<std::string>{"A1", "A2", "A3"});
  for (Category c : kCategories) {
    for (double r : rep.per_annotator_yes_rate.at(c)) CHECK(r == 1.0);
    for (const auto& k : rep.pairwise_kappa.at(c)) {
      CHECK(k.degenerate);
      CHECK(k.value == 1.0);
    }
  }
  for (const auto& [pid, maj] : rep.majority_labels) {
    for (bool b : maj) CHECK(b);
  }
  CHECK(to_json(rep)["kappa_degenerate"]["acceptable"][0] == true);
}

TEST_CASE("agreement_report aggregates by source and chapter") {
  ReportFixture f;
  // A1 accepts everything; A2 and A3 accept only human-summary pairs.
  for (const auto& pid : f.eval.entries) {
    const bool human = pid[0] == 'h';
    f.add(pid, "A1", AnnotationLabel::of(Y, S, S, S, S));
    for (const char* a : {"A2", "A3"}) {
      f.add(pid, a, human ? AnnotationLabel::of(Y, S, S, S, S)
                          : AnnotationLabel::of(N, Y, Y, N, N));
    }
  }
  // A superseded revision must not count.
  f.add("h0", "A2", AnnotationLabel::of(N, N, N, N, N), 0);

  const auto rep = agreement_report(f.records, f.eval, f.sets, {"A1", "A2", "A3"});
  CHECK(rep.per_annotator_yes_rate.at(Category::acceptable) ==
        std::vector<double>{1.0, 0.5, 0.5});
  CHECK(rep.per_annotator_yes_rate.at(Category::grammatical) ==
        std::vector<double>{1.0, 1.0, 1.0});
  const auto& ka = rep.pairwise_kappa.at(Category::acceptable);
  CHECK(ka[0].value == 0.0);  // A1 constant yes vs A2 mixed
  CHECK(ka[1].value == 1.0);
  CHECK(ka[2].value == 0.0);

  const auto& orig = rep.proportions_by_source.at(SourceKind::original);
  const auto& hum = rep.proportions_by_source.at(SourceKind::human_summary);
  CHECK(orig.n == 4);
  CHECK(orig.yes[0] == 0.0);
  CHECK(orig.yes[1] == 1.0);
  CHECK(orig.yes[3] == 0.0);
  CHECK(hum.yes[0] == 1.0);

  CHECK(rep.proportions_by_chapter.at("ch2").n == 6);
  CHECK(rep.proportions_by_chapter.at("ch3").n == 2);
  CHECK(rep.proportions_by_chapter.at("ch2").yes[0] == doctest::Approx(4.0 / 6.0));

  const auto table = render_agreement(rep);
  CHECK(table.find("100.0") != std::string::npos);
  CHECK(table.find("50.0") != std::string::npos);
  CHECK(render_by_source(rep).find("Human Summary") != std::string::npos);
  CHECK(render_by_chapter(rep).find("ch3") != std::string::npos);
}

TEST_CASE("agreement_report lists missing annotations") {
  ReportFixture f;
  for (const auto& pid : f.eval.entries) {
    for (const char* a : {"A1", "A2", "A3"}) {
      if (pid == "o3" && std::string(a) == "A2") continue;
      f.add(pid, a, AnnotationLabel::of(Y, S, S, S, S));
    }
  }
  CHECK_THROWS_WITH_AS(agreement_report(f.records, f.eval, f.sets),
                       "missing annotations for: o3", PreconditionError);
  f.records.resize(8);  // only A1
  CHECK_THROWS_AS(agreement_report(f.records, f.eval, f.sets), PreconditionError);
}
