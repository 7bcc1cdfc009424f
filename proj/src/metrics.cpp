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

#include "flashqg/metrics.hpp"

#include <cmath>
#include <memory>
#include <set>

#include <fmt/format.h>

#include "flashqg/error.hpp"
#include "flashqg/text.hpp"

namespace flashqg::metrics {

CoverageReport key_term_coverage(const pipeline::QuestionSet& qs,
                                 const std::vector<corpus::KeyTerm>& key_terms) {
  if (key_terms.empty()) throw PreconditionError("no key terms");
  std::vector<std::string> questions;
  std::vector<std::string> answers;
  for (const auto& p : qs.pairs) {
    questions.push_back(text::match_key(p.question));
    answers.push_back(text::match_key(p.answer));
  }
  auto any_contains = [](const std::vector<std::string>& hay, const std::string& key) {
    if (key.empty()) return false;
    for (const auto& h : hay) {
      if (h.find(key) != std::string::npos) return true;
    }
    return false;
  };

  CoverageReport r;
  r.source_kind = qs.source_kind;
  r.n = qs.pairs.size();
  std::size_t in_q = 0;
  std::size_t in_a = 0;
  std::size_t either = 0;
  for (const auto& t : key_terms) {
    const std::string key = text::match_key(t.surface);
    TermCoverage tc{t.surface, any_contains(questions, key), any_contains(answers, key)};
    in_q += tc.in_q;
    in_a += tc.in_a;
    either += tc.in_q || tc.in_a;
    r.per_term.push_back(std::move(tc));
  }
  const auto total = static_cast<double>(key_terms.size());
  r.pct_in_questions = static_cast<double>(in_q) / total;
  r.pct_in_answers = static_cast<double>(in_a) / total;
  r.pct_in_either = static_cast<double>(either) / total;
  return r;
}

nlohmann::ordered_json to_json(const CoverageReport& r) {
  nlohmann::ordered_json j;
  j["source_kind"] = pipeline::to_string(r.source_kind);
  j["n"] = r.n;
  j["pct_in_questions"] = r.pct_in_questions;
  j["pct_in_answers"] = r.pct_in_answers;
  j["pct_in_either"] = r.pct_in_either;
  auto& terms = j["per_term"] = nlohmann::ordered_json::array();
  for (const auto& t : r.per_term) {
    terms.push_back({{"term", t.term}, {"in_q", t.in_q}, {"in_a", t.in_a}});
  }
  return j;
}

// ---------------------------------------------------------------------------

std::string to_string(Judgment j) {
  switch (j) {
    case Judgment::yes: return "yes";
    case Judgment::no: return "no";
    case Judgment::skipped: return "skipped";
  }
  return "?";
}

std::string to_string(Category c) {
  switch (c) {
    case Category::acceptable: return "acceptable";
    case Category::grammatical: return "grammatical";
    case Category::interpretable: return "interpretable";
    case Category::relevant: return "relevant";
    case Category::correct: return "correct";
  }
  return "?";
}

std::string display_name(Category c) {
  std::string s = to_string(c);
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

Judgment parse_judgment(std::string_view s) {
  if (s == "yes") return Judgment::yes;
  if (s == "no") return Judgment::no;
  if (s == "skipped" || s.empty()) return Judgment::skipped;
  throw PreconditionError(fmt::format("bad judgment '{}'", s));
}

AnnotationLabel AnnotationLabel::of(Judgment acceptable, Judgment grammatical,
                                    Judgment interpretable, Judgment relevant,
                                    Judgment correct) {
  AnnotationLabel l;
  l.values = {acceptable, grammatical, interpretable, relevant, correct};
  return l;
}

nlohmann::ordered_json to_json(const AnnotationLabel& l) {
  nlohmann::ordered_json j;
  for (Category c : kCategories) j[to_string(c)] = to_string(l[c]);
  return j;
}

AnnotationLabel label_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionError("label must be an object");
  AnnotationLabel l;
  for (Category c : kCategories) {
    const auto key = to_string(c);
    if (!j.contains(key) || j[key].is_null()) continue;
    const auto& v = j[key];
    if (v.is_boolean()) {
      l[c] = v.get<bool>() ? Judgment::yes : Judgment::no;
    } else if (v.is_string()) {
      l[c] = parse_judgment(v.get<std::string>());
    } else {
      throw PreconditionError(fmt::format("bad value for '{}'", key));
    }
  }
  return l;
}

AnnotationLabel expand_annotation(const AnnotationLabel& raw) {
  switch (raw[Category::acceptable]) {
    case Judgment::yes: {
      AnnotationLabel out;
      out.values.fill(Judgment::yes);
      return out;
    }
    case Judgment::no:
      for (Category c : kCategories) {
        if (raw[c] == Judgment::skipped) {
          throw PreconditionError(
              fmt::format("incomplete annotation: '{}' skipped", to_string(c)));
        }
      }
      return raw;
    case Judgment::skipped:
      break;
  }
  throw PreconditionError("incomplete annotation: 'acceptable' skipped");
}

bool majority_vote(std::span<const AnnotationLabel> labels, Category category) {
  if (labels.size() != 3) {
    throw PreconditionError(
        fmt::format("majority vote needs 3 labels, got {}", labels.size()));
  }
  int yes = 0;
  for (const auto& l : labels) {
    if (l[category] == Judgment::skipped) {
      throw PreconditionError("majority vote on an unexpanded label");
    }
    yes += l[category] == Judgment::yes;
  }
  return yes >= 2;
}

Kappa cohen_kappa_detail(std::span<const bool> a, std::span<const bool> b) {
  if (a.size() != b.size()) {
    throw PreconditionError(
        fmt::format("kappa length mismatch: {} vs {}", a.size(), b.size()));
  }
  if (a.empty()) throw PreconditionError("kappa of empty label vectors");
  const long long n = static_cast<long long>(a.size());
  long long agree = 0;
  long long yes_a = 0;
  long long yes_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    yes_a += a[i];
    yes_b += b[i];
  }
  // Chance agreement scaled by n^2, kept in integers.
  const long long chance = yes_a * yes_b + (n - yes_a) * (n - yes_b);
  Kappa k;
  k.observed = static_cast<double>(agree) / static_cast<double>(n);
  k.expected = static_cast<double>(chance) / static_cast<double>(n * n);
  if (chance == n * n) {
    k.degenerate = true;
    k.value = agree == n ? 1.0 : 0.0;
    return k;
  }
  k.value = static_cast<double>(n * agree - chance) / static_cast<double>(n * n - chance);
  return k;
}

double cohen_kappa(std::span<const bool> a, std::span<const bool> b) {
  return cohen_kappa_detail(a, b).value;
}

nlohmann::ordered_json to_json(const AnnotationRecord& r) {
  nlohmann::ordered_json j;
  j["pair_id"] = r.pair_id;
  j["annotator_id"] = r.annotator_id;
  j["label"] = to_json(r.label);
  j["submitted_at"] = r.submitted_at;
  j["revision"] = r.revision;
  return j;
}

AnnotationRecord record_from_json(const nlohmann::json& j) {
  AnnotationRecord r;
  if (!j.is_object()) throw PreconditionError("record must be an object");
  if (!j.contains("pair_id") || !j["pair_id"].is_string() ||
      !j.contains("annotator_id") || !j["annotator_id"].is_string()) {
    throw PreconditionError("record needs string pair_id and annotator_id");
  }
  r.pair_id = j["pair_id"].get<std::string>();
  r.annotator_id = j["annotator_id"].get<std::string>();
  r.label = label_from_json(j.value("label", nlohmann::json::object()));
  if (j.contains("submitted_at") && j["submitted_at"].is_string()) {
    r.submitted_at = j["submitted_at"].get<std::string>();
  }
  if (j.contains("revision") && j["revision"].is_number_unsigned()) {
    r.revision = j["revision"].get<std::size_t>();
  }
  return r;
}

// ---------------------------------------------------------------------------

AgreementReport agreement_report(const std::vector<AnnotationRecord>& annotations,
                                 const pipeline::EvalSet& eval_set,
                                 const std::vector<pipeline::QuestionSet>& sets,
                                 std::vector<std::string> annotator_order) {
  // Latest revision per (pair, annotator).
  std::map<std::pair<std::string, std::string>, const AnnotationRecord*> latest;
  std::set<std::string> seen_annotators;
  for (const auto& r : annotations) {
    seen_annotators.insert(r.annotator_id);
    auto& slot = latest[{r.pair_id, r.annotator_id}];
    if (slot == nullptr || r.revision >= slot->revision) slot = &r;
  }
  if (annotator_order.empty()) {
    annotator_order.assign(seen_annotators.begin(), seen_annotators.end());
  }
  if (annotator_order.size() != 3) {
    throw PreconditionError(fmt::format("agreement needs exactly 3 annotators, got {}",
                                        annotator_order.size()));
  }

  std::vector<std::string> missing;
  for (const auto& pid : eval_set.entries) {
    for (const auto& a : annotator_order) {
      if (!latest.contains({pid, a})) {
        missing.push_back(pid);
        break;
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
      list += (i ? ", " : "") + missing[i];
    }
    if (missing.size() > 20) list += fmt::format(", ... ({} total)", missing.size());
    throw PreconditionError("missing annotations for: " + list);
  }

  std::map<std::string, const pipeline::QAPair*> pair_lookup;
  for (const auto& qs : sets) {
    for (const auto& p : qs.pairs) pair_lookup.emplace(p.pair_id, &p);
  }

  AgreementReport rep;
  rep.annotators = annotator_order;
  rep.n_items = eval_set.entries.size();
  const std::size_t n = rep.n_items;

  // labels[annotator][item]
  std::vector<std::vector<AnnotationLabel>> labels(3);
  for (std::size_t a = 0; a < 3; ++a) {
    for (const auto& pid : eval_set.entries) {
      labels[a].push_back(expand_annotation(latest.at({pid, annotator_order[a]})->label));
    }
  }

  std::map<pipeline::SourceKind, std::array<std::size_t, 5>> yes_by_source;
  std::map<std::string, std::array<std::size_t, 5>> yes_by_chapter;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pid = eval_set.entries[i];
    const std::array<AnnotationLabel, 3> trio{labels[0][i], labels[1][i], labels[2][i]};
    std::array<bool, 5> maj{};
    for (Category c : kCategories) {
      maj[static_cast<std::size_t>(c)] = majority_vote(trio, c);
    }
    rep.majority_labels[pid] = maj;

    auto it = pair_lookup.find(pid);
    if (it == pair_lookup.end()) {
      throw PreconditionError(fmt::format("eval-set pair '{}' not in any question set", pid));
    }
    auto& src = rep.proportions_by_source[it->second->source_kind];
    auto& chap = rep.proportions_by_chapter[it->second->chapter_id];
    ++src.n;
    ++chap.n;
    auto& ys = yes_by_source[it->second->source_kind];
    auto& yc = yes_by_chapter[it->second->chapter_id];
    for (std::size_t c = 0; c < 5; ++c) {
      ys[c] += maj[c];
      yc[c] += maj[c];
    }
  }
  for (auto& [kind, g] : rep.proportions_by_source) {
    for (std::size_t c = 0; c < 5; ++c) {
      g.yes[c] = static_cast<double>(yes_by_source[kind][c]) / static_cast<double>(g.n);
    }
  }
  for (auto& [chapter, g] : rep.proportions_by_chapter) {
    for (std::size_t c = 0; c < 5; ++c) {
      g.yes[c] = static_cast<double>(yes_by_chapter[chapter][c]) / static_cast<double>(g.n);
    }
  }

  for (Category c : kCategories) {
    // std::vector<bool> is not contiguous, so votes live in plain arrays.
    std::array<std::unique_ptr<bool[]>, 3> votes;
    auto& rates = rep.per_annotator_yes_rate[c];
    for (std::size_t a = 0; a < 3; ++a) {
      votes[a] = std::make_unique<bool[]>(n);
      std::size_t yes = 0;
      for (std::size_t i = 0; i < n; ++i) {
        votes[a][i] = labels[a][i][c] == Judgment::yes;
        yes += votes[a][i];
      }
      rates.push_back(n == 0 ? 0.0 : static_cast<double>(yes) / static_cast<double>(n));
    }
    if (n == 0) continue;
    auto span_of = [&](std::size_t a) { return std::span<const bool>(votes[a].get(), n); };
    rep.pairwise_kappa[c] = {cohen_kappa_detail(span_of(0), span_of(1)),
                             cohen_kappa_detail(span_of(1), span_of(2)),
                             cohen_kappa_detail(span_of(2), span_of(0))};
  }
  return rep;
}

nlohmann::ordered_json to_json(const AgreementReport& r) {
  // ordered_json is vector-backed: build members locally, then insert.
  nlohmann::ordered_json rates = nlohmann::ordered_json::object();
  for (const auto& [c, v] : r.per_annotator_yes_rate) rates[to_string(c)] = v;
  nlohmann::ordered_json kappa = nlohmann::ordered_json::object();
  nlohmann::ordered_json degenerate = nlohmann::ordered_json::object();
  for (const auto& [c, triple] : r.pairwise_kappa) {
    kappa[to_string(c)] = {triple[0].value, triple[1].value, triple[2].value};
    degenerate[to_string(c)] = {triple[0].degenerate, triple[1].degenerate,
                                triple[2].degenerate};
  }
  nlohmann::ordered_json maj = nlohmann::ordered_json::object();
  for (const auto& [pid, v] : r.majority_labels) {
    nlohmann::ordered_json m;
    for (Category c : kCategories) m[to_string(c)] = v[static_cast<std::size_t>(c)];
    maj[pid] = std::move(m);
  }
  auto group = [](const GroupProportions& g) {
    nlohmann::ordered_json o;
    o["n"] = g.n;
    for (Category c : kCategories) o[to_string(c)] = g.yes[static_cast<std::size_t>(c)];
    return o;
  };
  nlohmann::ordered_json by_source = nlohmann::ordered_json::object();
  for (const auto& [k, g] : r.proportions_by_source) by_source[pipeline::to_string(k)] = group(g);
  nlohmann::ordered_json by_chapter = nlohmann::ordered_json::object();
  for (const auto& [ch, g] : r.proportions_by_chapter) by_chapter[ch] = group(g);

  nlohmann::ordered_json j;
  j["annotators"] = r.annotators;
  j["n_items"] = r.n_items;
  j["per_annotator_yes_rate"] = std::move(rates);
  j["pairwise_kappa"] = std::move(kappa);
  j["kappa_degenerate"] = std::move(degenerate);
  j["majority_labels"] = std::move(maj);
  j["proportions_by_source"] = std::move(by_source);
  j["proportions_by_chapter"] = std::move(by_chapter);
  return j;
}

// ---------------------------------------------------------------------------

double round_pct(double fraction) {
  const double scaled = fraction * 1000.0;
  // Nudge so that exact halves that land just below .5 in binary still round up.
  const double nudged = scaled + (scaled >= 0 ? 1e-9 : -1e-9);
  return std::round(nudged) / 10.0;
}

std::string format_pct(double fraction) { return fmt::format("{:.1f}", round_pct(fraction)); }

namespace {

std::string kappa_str(double v) {
  const double r = std::round(v * 100.0 + (v >= 0 ? 1e-9 : -1e-9)) / 100.0;
  return fmt::format("{:.2f}", r);
}

std::string source_label(pipeline::SourceKind k) {
  switch (k) {
    case pipeline::SourceKind::original: return "Original Text";
    case pipeline::SourceKind::human_summary: return "Human Summary";
    case pipeline::SourceKind::auto_summary: return "Auto Summary";
  }
  return "?";
}

}  // namespace

std::string render_coverage(const std::vector<CoverageReport>& rows) {
  std::string out = fmt::format("{:<15} {:>6} {:>7} {:>7} {:>9}\n", "Source", "n", "Qs",
                                "As", "Qs or As");
  for (const auto& r : rows) {
    out += fmt::format("{:<15} {:>6} {:>6}% {:>6}% {:>8}%\n", source_label(r.source_kind),
                       r.n, format_pct(r.pct_in_questions), format_pct(r.pct_in_answers),
                       format_pct(r.pct_in_either));
  }
  return out;
}

std::string render_agreement(const AgreementReport& r) {
  std::string out = fmt::format("{:<14}", "");
  for (const auto& a : r.annotators) out += fmt::format(" {:>6}", a);
  out += "   Pairwise IAA\n";
  for (Category c : kCategories) {
    out += fmt::format("{:<14}", display_name(c));
    for (double v : r.per_annotator_yes_rate.at(c)) out += fmt::format(" {:>6}", format_pct(v));
    if (auto it = r.pairwise_kappa.find(c); it != r.pairwise_kappa.end()) {
      const auto& k = it->second;
      out += fmt::format("   ({}, {}, {})", kappa_str(k[0].value), kappa_str(k[1].value),
                         kappa_str(k[2].value));
      if (k[0].degenerate || k[1].degenerate || k[2].degenerate) out += " [degenerate]";
    }
    out += "\n";
  }
  return out;
}

std::string render_by_source(const AgreementReport& r) {
  std::string out = fmt::format("{:<14}", "");
  for (const auto& [k, g] : r.proportions_by_source) {
    out += fmt::format(" {:>15}", source_label(k));
  }
  out += "\n";
  out += fmt::format("{:<14}", "n");
  for (const auto& [k, g] : r.proportions_by_source) out += fmt::format(" {:>15}", g.n);
  out += "\n";
  for (Category c : kCategories) {
    out += fmt::format("{:<14}", display_name(c));
    for (const auto& [k, g] : r.proportions_by_source) {
      out += fmt::format(" {:>14}%", format_pct(g.yes[static_cast<std::size_t>(c)]));
    }
    out += "\n";
  }
  return out;
}

std::string render_by_chapter(const AgreementReport& r) {
  std::string out = fmt::format("{:<14}", "");
  for (const auto& [ch, g] : r.proportions_by_chapter) out += fmt::format(" {:>12}", ch);
  out += "\n";
  out += fmt::format("{:<14}", "# Questions");
  for (const auto& [ch, g] : r.proportions_by_chapter) {
    out += fmt::format(" {:>12}", fmt::format("(n = {})", g.n));
  }
  out += "\n";
  for (Category c : kCategories) {
    out += fmt::format("{:<14}", display_name(c));
    for (const auto& [ch, g] : r.proportions_by_chapter) {
      out += fmt::format(" {:>11}%", format_pct(g.yes[static_cast<std::size_t>(c)]));
    }
    out += "\n";
  }
  return out;
}

}  // namespace flashqg::metrics
