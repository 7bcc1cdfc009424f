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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flashqg/corpus.hpp"
#include "flashqg/pipeline.hpp"

namespace flashqg::metrics {

// ---------------------------------------------------------------------------
// Key-term coverage

struct TermCoverage {
  std::string term;
  bool in_q = false;
  bool in_a = false;
};

struct CoverageReport {
  pipeline::SourceKind source_kind = pipeline::SourceKind::original;
  std::size_t n = 0;
  double pct_in_questions = 0.0;
  double pct_in_answers = 0.0;
  double pct_in_either = 0.0;
  std::vector<TermCoverage> per_term;
};

/// A term is covered in questions if its match key (whitespace-collapsed,
/// case-folded) is a substring of any question's match key; likewise for
/// answers. Throws PreconditionError on an empty term list.
CoverageReport key_term_coverage(const pipeline::QuestionSet& qs,
                                 const std::vector<corpus::KeyTerm>& key_terms);

nlohmann::ordered_json to_json(const CoverageReport& r);

// ---------------------------------------------------------------------------
// Annotation labels

enum class Judgment { yes, no, skipped };

enum class Category { acceptable, grammatical, interpretable, relevant, correct };

inline constexpr std::array<Category, 5> kCategories = {
    Category::acceptable, Category::grammatical, Category::interpretable,
    Category::relevant, Category::correct};

std::string to_string(Judgment j);
std::string to_string(Category c);
/// Title-case name used in rendered tables ("Acceptable").
std::string display_name(Category c);
Judgment parse_judgment(std::string_view s);

struct AnnotationLabel {
  std::array<Judgment, 5> values{Judgment::skipped, Judgment::skipped, Judgment::skipped,
                                 Judgment::skipped, Judgment::skipped};

  Judgment& operator[](Category c) { return values[static_cast<std::size_t>(c)]; }
  Judgment operator[](Category c) const { return values[static_cast<std::size_t>(c)]; }
  bool operator==(const AnnotationLabel&) const = default;

  static AnnotationLabel of(Judgment acceptable, Judgment grammatical,
                            Judgment interpretable, Judgment relevant, Judgment correct);
};

nlohmann::ordered_json to_json(const AnnotationLabel& l);
/// Missing fields read as "skipped".
AnnotationLabel label_from_json(const nlohmann::json& j);

/// Applies the skip rule: an acceptable question is taken to be yes on every
/// category. A label that is not acceptable must have all other fields set.
/// Throws PreconditionError("incomplete annotation") otherwise.
AnnotationLabel expand_annotation(const AnnotationLabel& raw);

/// True iff at least two of exactly three expanded labels say yes.
bool majority_vote(std::span<const AnnotationLabel> labels, Category category);

// ---------------------------------------------------------------------------
// Agreement

struct Kappa {
  double value = 0.0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  /// Both raters constant on the same class: p_e = 1, value defined as
  /// 1 when p_o = 1 and 0 otherwise.
  bool degenerate = false;
};

/// Cohen's kappa for two binary raters.
/// Throws PreconditionError on empty input or a length mismatch.
Kappa cohen_kappa_detail(std::span<const bool> a, std::span<const bool> b);
double cohen_kappa(std::span<const bool> a, std::span<const bool> b);

struct AnnotationRecord {
  std::string pair_id;
  std::string annotator_id;
  AnnotationLabel label;
  std::string submitted_at;
  std::size_t revision = 0;
};

nlohmann::ordered_json to_json(const AnnotationRecord& r);
AnnotationRecord record_from_json(const nlohmann::json& j);

/// Yes-proportions over the items of one group.
struct GroupProportions {
  std::size_t n = 0;
  std::array<double, 5> yes{};  // indexed by Category
};

struct AgreementReport {
  /// Annotator ids in report order (A1, A2, A3).
  std::vector<std::string> annotators;
  std::size_t n_items = 0;
  /// category -> yes-rate per annotator, in `annotators` order.
  std::map<Category, std::vector<double>> per_annotator_yes_rate;
  /// category -> (A1-A2, A2-A3, A3-A1).
  std::map<Category, std::array<Kappa, 3>> pairwise_kappa;
  std::map<std::string, std::array<bool, 5>> majority_labels;
  std::map<pipeline::SourceKind, GroupProportions> proportions_by_source;
  std::map<std::string, GroupProportions> proportions_by_chapter;
};

/// Per-annotator rates, pairwise kappa and majority-vote proportions over an
/// evaluation set annotated by exactly three annotators.
///
/// `annotations` must hold one expanded label per (pair, annotator) for every
/// eval-set pair; otherwise PreconditionError lists the missing pair ids.
/// `annotator_order` fixes A1..A3; by default ids are sorted.
AgreementReport agreement_report(const std::vector<AnnotationRecord>& annotations,
                                 const pipeline::EvalSet& eval_set,
                                 const std::vector<pipeline::QuestionSet>& sets,
                                 std::vector<std::string> annotator_order = {});

nlohmann::ordered_json to_json(const AgreementReport& r);

// ---------------------------------------------------------------------------
// Rendering

/// Percentage rounded half away from zero to one decimal, e.g. 0.6966 -> 69.7.
double round_pct(double fraction);
std::string format_pct(double fraction);

/// Aligned-text rendering of coverage rows (one per report).
std::string render_coverage(const std::vector<CoverageReport>& rows);
/// Per-annotator yes-rates with pairwise kappa triples.
std::string render_agreement(const AgreementReport& r);
/// Majority-vote proportions by source.
std::string render_by_source(const AgreementReport& r);
/// Majority-vote proportions by chapter, with item counts.
std::string render_by_chapter(const AgreementReport& r);

}  // namespace flashqg::metrics
