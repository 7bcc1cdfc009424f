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

#include "flashqg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "flashqg/text.hpp"

namespace flashqg::pipeline {

std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::original: return "original";
    case SourceKind::human_summary: return "human_summary";
    case SourceKind::auto_summary: return "auto_summary";
  }
  return "?";
}

SourceKind parse_source_kind(std::string_view s) {
  if (s == "original") return SourceKind::original;
  if (s == "human_summary" || s == "human-summary") return SourceKind::human_summary;
  if (s == "auto_summary" || s == "auto-summary") return SourceKind::auto_summary;
  throw PreconditionError(fmt::format("unknown source kind '{}'", s));
}

std::string to_string(Granularity g) {
  return g == Granularity::chapter ? "chapter" : "section";
}

nlohmann::ordered_json to_json(const QAPair& p) {
  nlohmann::ordered_json j;
  j["pair_id"] = p.pair_id;
  j["question"] = p.question;
  j["answer"] = p.answer;
  j["source_kind"] = to_string(p.source_kind);
  j["doc_id"] = p.doc_id;
  j["chapter_id"] = p.chapter_id;
  j["section_id"] = p.section_id;
  j["chunk_index"] = p.chunk_index;
  j["sentence_index"] = p.sentence_index;
  j["author_id"] = p.author_id ? nlohmann::ordered_json(*p.author_id) : nlohmann::ordered_json(nullptr);
  j["run_id"] = p.run_id;
  return j;
}

QAPair qa_pair_from_json(const nlohmann::json& j) {
  QAPair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.question = j.at("question").get<std::string>();
  p.answer = j.at("answer").get<std::string>();
  p.source_kind = parse_source_kind(j.at("source_kind").get<std::string>());
  p.doc_id = j.value("doc_id", "");
  p.chapter_id = j.value("chapter_id", "");
  p.section_id = j.value("section_id", "");
  p.chunk_index = j.value("chunk_index", std::size_t{0});
  p.sentence_index = j.value("sentence_index", std::size_t{0});
  if (j.contains("author_id") && j["author_id"].is_string()) {
    p.author_id = j["author_id"].get<std::string>();
  }
  p.run_id = j.value("run_id", "");
  if (p.question.empty() || p.answer.empty()) {
    throw ParseError(fmt::format("pair '{}': empty question or answer", p.pair_id), 0);
  }
  return p;
}

const ChunkRecord* QuestionSet::chunk_for(const QAPair& pair) const {
  for (const auto& c : chunks) {
    if (c.author_id == pair.author_id && c.chapter_id == pair.chapter_id &&
        c.chunk_index == pair.chunk_index &&
        std::find(c.section_ids.begin(), c.section_ids.end(), pair.section_id) !=
            c.section_ids.end()) {
      return &c;
    }
  }
  return nullptr;
}

const QAPair* QuestionSet::find(std::string_view pair_id) const {
  for (const auto& p : pairs) {
    if (p.pair_id == pair_id) return &p;
  }
  return nullptr;
}

namespace {

// A passage segmented as one sentence sequence: a section, or one author's
// summaries of a whole chapter.
struct Unit {
  std::optional<std::string> author_id;
  std::string chapter_id;
  std::vector<std::pair<std::string, std::string>> parts;  // (section_id, text)
};

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string derive_run_id(SourceKind kind, const std::string& doc_id,
                          const gateway::Backend& backend, const GenerateConfig& cfg) {
  std::uint64_t h = fnv1a(doc_id);
  h = fnv1a(to_string(kind), h);
  h = fnv1a(backend.descriptor().name, h);
  h = fnv1a(std::to_string(cfg.token_limit), h);
  h = fnv1a(to_string(cfg.summary_granularity), h);
  return fmt::format("{}-{:08x}", to_string(kind), h & 0xffffffffu);
}

std::vector<Unit> section_units(const corpus::SourceDocument& doc) {
  std::vector<Unit> units;
  for (const auto& ch : doc.chapters) {
    for (const auto& sec : ch.sections) {
      units.push_back({std::nullopt, ch.chapter_id, {{sec.section_id, sec.text}}});
    }
  }
  return units;
}

std::vector<Unit> summary_units(const corpus::SourceDocument& doc,
                                const std::vector<corpus::SummarySet>& summaries,
                                Granularity granularity) {
  // Document order of (chapter, section); unknown ids sort after, in input order.
  std::map<std::pair<std::string, std::string>, std::size_t> section_rank;
  std::map<std::string, std::size_t> chapter_rank;
  for (const auto& ch : doc.chapters) {
    chapter_rank.emplace(ch.chapter_id, chapter_rank.size());
    for (const auto& sec : ch.sections) {
      section_rank.emplace(std::make_pair(ch.chapter_id, sec.section_id),
                           section_rank.size());
    }
  }
  std::vector<Unit> units;
  for (const auto& set : summaries) {
    std::vector<const corpus::SummaryEntry*> entries;
    for (const auto& e : set.entries) entries.push_back(&e);
    auto rank = [&](const corpus::SummaryEntry* e) {
      auto c = chapter_rank.find(e->chapter_id);
      auto s = section_rank.find({e->chapter_id, e->section_id});
      return std::make_pair(c == chapter_rank.end() ? SIZE_MAX : c->second,
                            s == section_rank.end() ? SIZE_MAX : s->second);
    };
    std::stable_sort(entries.begin(), entries.end(),
                     [&](auto* a, auto* b) { return rank(a) < rank(b); });
    for (const auto* e : entries) {
      const bool same_chapter = !units.empty() && units.back().author_id == set.author_id &&
                                units.back().chapter_id == e->chapter_id;
      if (granularity == Granularity::chapter && same_chapter) {
        units.back().parts.emplace_back(e->section_id, e->summary_text);
      } else {
        units.push_back({set.author_id, e->chapter_id, {{e->section_id, e->summary_text}}});
      }
    }
  }
  return units;
}

struct SentenceJob {
  std::size_t chunk = 0;     // position in the unit's chunk list
  std::size_t position = 0;  // sentence position within the chunk
};

struct JobResult {
  std::optional<std::pair<std::string, std::string>> qa;  // (question, answer)
  std::vector<gateway::Rejection> rejections;
  std::exception_ptr error;
};

JobResult run_job(gateway::Backend& backend, const segmentation::Chunk& chunk,
                  std::size_t position) {
  JobResult r;
  try {
    const auto hc = gateway::insert_highlights(chunk, position,
                                               backend.descriptor().highlight_marker);
    if (auto span = gateway::extract_answer(backend, hc, &r.rejections)) {
      std::string question = gateway::generate_question(backend, chunk, *span);
      r.qa.emplace(std::move(question), span->text);
    }
  } catch (...) {
    r.error = std::current_exception();
  }
  return r;
}

std::vector<JobResult> run_jobs(gateway::Backend& backend,
                                const std::vector<segmentation::Chunk>& chunks,
                                const std::vector<SentenceJob>& jobs, unsigned workers) {
  std::vector<JobResult> results(jobs.size());
  auto work = [&](std::size_t i) {
    results[i] = run_job(backend, chunks[jobs[i].chunk], jobs[i].position);
  };
  if (workers <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      work(i);
      if (results[i].error) break;
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) work(i);
    });
  }
  pool.clear();
  return results;
}

std::string error_message(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

QuestionSet generate_units(std::vector<Unit> units, const std::string& doc_id,
                           SourceKind kind, gateway::Backend& backend,
                           const GenerateConfig& cfg) {
  if (cfg.token_limit < 1) throw PreconditionError("token_limit must be >= 1");
  gateway::require(backend, gateway::Capability::extract_answer);
  gateway::require(backend, gateway::Capability::generate_question);
  if (kind == SourceKind::auto_summary) {
    gateway::require(backend, gateway::Capability::summarize);
  }
  if (cfg.roundtrip_filter) {
    gateway::require(backend, gateway::Capability::answer_question);
  }

  QuestionSet qs;
  qs.source_kind = kind;
  qs.run_id = cfg.run_id.empty() ? derive_run_id(kind, doc_id, backend, cfg) : cfg.run_id;
  auto& m = qs.manifest;
  m.backend = backend.descriptor().to_json();
  m.token_counter = backend.token_counter().name();
  m.token_limit = cfg.token_limit;
  m.chunk_token_limit = cfg.token_limit > segmentation::kHighlightMargin
                            ? cfg.token_limit - segmentation::kHighlightMargin
                            : 1;
  m.started_at = text::utc_timestamp();
  m.doc_id = doc_id;
  m.dedupe = cfg.dedupe;
  m.roundtrip_filter = cfg.roundtrip_filter;
  m.summary_granularity = to_string(cfg.summary_granularity);

  auto fail = [&](const std::string& what) -> GenerationError {
    m.failure = what;
    m.finished_at = text::utc_timestamp();
    m.pairs_before_filters = qs.pairs.size();
    spdlog::error("generation stopped: {}", what);
    return GenerationError(what, qs);
  };

  std::size_t seq = 0;
  for (auto& unit : units) {
    if (kind == SourceKind::auto_summary) {
      for (auto& [section_id, body] : unit.parts) {
        try {
          body = gateway::summarize_long(backend, body, cfg.token_limit);
        } catch (const BackendError& e) {
          throw fail(fmt::format("{}/{}: {}", unit.chapter_id, section_id, e.what()));
        }
      }
    }

    std::vector<segmentation::Sentence> sentences;
    std::vector<std::string> sentence_section;
    for (const auto& [section_id, body] : unit.parts) {
      for (auto& s : segmentation::split_sentences(body, backend.token_counter())) {
        s.index = sentences.size();
        sentences.push_back(std::move(s));
        sentence_section.push_back(section_id);
      }
    }
    m.sentence_count += sentences.size();
    const auto chunks = segmentation::chunk(sentences, m.chunk_token_limit);

    std::vector<SentenceJob> jobs;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      ChunkRecord rec;
      rec.author_id = unit.author_id;
      rec.chapter_id = unit.chapter_id;
      rec.chunk_index = chunks[c].chunk_index;
      rec.oversized = chunks[c].oversized;
      rec.text = chunks[c].text();
      for (const auto& s : chunks[c].sentences) {
        const auto& sec = sentence_section[s.index];
        if (std::find(rec.section_ids.begin(), rec.section_ids.end(), sec) ==
            rec.section_ids.end()) {
          rec.section_ids.push_back(sec);
        }
      }
      qs.chunks.push_back(std::move(rec));
      for (std::size_t p = 0; p < chunks[c].sentences.size(); ++p) jobs.push_back({c, p});
    }

    auto results = run_jobs(backend, chunks, jobs, cfg.workers);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto& r = results[i];
      for (auto& rej : r.rejections) m.rejections.push_back(std::move(rej));
      if (r.error) {
        throw fail(fmt::format("{}: chunk {}, sentence {}: {}", unit.chapter_id,
                               jobs[i].chunk, jobs[i].position, error_message(r.error)));
      }
      if (!r.qa) continue;
      const auto& sentence = chunks[jobs[i].chunk].sentences[jobs[i].position];
      QAPair p;
      p.pair_id = fmt::format("{}-{:05d}", qs.run_id, ++seq);
      p.question = std::move(r.qa->first);
      p.answer = std::move(r.qa->second);
      p.source_kind = kind;
      p.doc_id = doc_id;
      p.chapter_id = unit.chapter_id;
      p.section_id = sentence_section[sentence.index];
      p.chunk_index = chunks[jobs[i].chunk].chunk_index;
      p.sentence_index = sentence.index;
      p.author_id = unit.author_id;
      p.run_id = qs.run_id;
      qs.pairs.push_back(std::move(p));
    }
  }
  m.pairs_before_filters = qs.pairs.size();

  if (cfg.dedupe) qs = dedupe(qs);
  if (cfg.roundtrip_filter) {
    try {
      qs = roundtrip_filter(qs, backend);
    } catch (const BackendError& e) {
      throw fail(fmt::format("roundtrip filter: {}", e.what()));
    }
  }
  m.finished_at = text::utc_timestamp();
  return qs;
}

}  // namespace

QuestionSet generate(const corpus::SourceDocument& doc, SourceKind kind,
                     gateway::Backend& backend, const GenerateConfig& config,
                     const std::vector<corpus::SummarySet>& summaries) {
  std::vector<Unit> units;
  if (kind == SourceKind::human_summary) {
    if (summaries.empty()) throw PreconditionError("human_summary needs summaries");
    units = summary_units(doc, summaries, config.summary_granularity);
  } else {
    units = section_units(doc);
  }
  if (units.empty()) throw PreconditionError("empty input");
  return generate_units(std::move(units), doc.doc_id, kind, backend, config);
}

QuestionSet generate_text(std::string_view input, SourceKind kind,
                          gateway::Backend& backend, const GenerateConfig& config) {
  const std::string body = text::collapse_whitespace(input);
  if (body.empty()) throw PreconditionError("empty input");
  std::optional<std::string> author;
  if (kind == SourceKind::human_summary) author = "";
  std::vector<Unit> units{{author, "ch1", {{"s1", body}}}};
  return generate_units(std::move(units), "text", kind, backend, config);
}

QuestionSet dedupe(const QuestionSet& qs) {
  QuestionSet out = qs;
  out.pairs.clear();
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : qs.pairs) {
    if (seen.emplace(text::match_key(p.question), text::match_key(p.answer)).second) {
      out.pairs.push_back(p);
    }
  }
  out.manifest.dedupe = true;
  return out;
}

QuestionSet roundtrip_filter(const QuestionSet& qs, gateway::Backend& backend) {
  gateway::require(backend, gateway::Capability::answer_question);
  QuestionSet out = qs;
  out.pairs.clear();
  for (const auto& p : qs.pairs) {
    const ChunkRecord* chunk = qs.chunk_for(p);
    if (chunk == nullptr) {
      throw PreconditionError(fmt::format("no chunk recorded for pair '{}'", p.pair_id));
    }
    const std::string predicted =
        text::strip_punct_fold(gateway::answer_question(backend, chunk->text, p.question));
    const std::string stored = text::strip_punct_fold(p.answer);
    const bool agrees = !predicted.empty() && !stored.empty() &&
                        (predicted.find(stored) != std::string::npos ||
                         stored.find(predicted) != std::string::npos);
    if (agrees) out.pairs.push_back(p);
  }
  out.manifest.roundtrip_filter = true;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation-set sampling

namespace {

// Uniform draw in [0, bound) by rejection; independent of the standard
// library's distribution implementations so results match across platforms.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t count, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count && i + 1 < v.size(); ++i) {
    const std::size_t j = i + draw_below(rng, v.size() - i);
    std::swap(v[i], v[j]);
  }
}

}  // namespace

nlohmann::ordered_json to_json(const EvalSet& e) {
  nlohmann::ordered_json j;
  j["eval_id"] = e.eval_id;
  j["entries"] = e.entries;
  j["per_source_quota"] = e.per_source_quota;
  j["seed"] = e.seed;
  return j;
}

EvalSet eval_set_from_json(const nlohmann::json& j) {
  EvalSet e;
  e.eval_id = j.at("eval_id").get<std::string>();
  e.entries = j.at("entries").get<std::vector<std::string>>();
  e.per_source_quota = j.value("per_source_quota", std::size_t{0});
  e.seed = j.value("seed", std::uint64_t{0});
  std::set<std::string> unique(e.entries.begin(), e.entries.end());
  if (unique.size() != e.entries.size()) {
    throw ParseError("eval set has duplicate entries", 0);
  }
  return e;
}

EvalSet sample_eval_set(const std::vector<QuestionSet>& sets, std::size_t quota,
                        std::uint64_t seed) {
  std::set<SourceKind> kinds;
  for (const auto& qs : sets) {
    if (!kinds.insert(qs.source_kind).second) {
      throw PreconditionError(
          fmt::format("two sets share source kind {}", to_string(qs.source_kind)));
    }
    if (qs.pairs.size() < quota) {
      throw PreconditionError(fmt::format("quota {} exceeds {} pairs in run {}", quota,
                                          qs.pairs.size(), qs.run_id));
    }
  }
  std::mt19937_64 rng(seed);
  EvalSet e;
  e.per_source_quota = quota;
  e.seed = seed;
  e.eval_id = fmt::format("eval-q{}-s{}", quota, seed);
  for (const auto& qs : sets) {
    std::vector<std::size_t> idx(qs.pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    partial_shuffle(idx, quota, rng);
    for (std::size_t i = 0; i < quota; ++i) e.entries.push_back(qs.pairs[idx[i]].pair_id);
  }
  partial_shuffle(e.entries, e.entries.size(), rng);
  std::set<std::string> unique(e.entries.begin(), e.entries.end());
  if (unique.size() != e.entries.size()) {
    throw PreconditionError("pair ids collide across question sets");
  }
  return e;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out.flush()) throw Error(fmt::format("write failed for '{}'", path.string()));
}

std::filesystem::path strip_suffix(const std::filesystem::path& p) {
  const std::string s = p.string();
  constexpr std::string_view kPairs = ".pairs.jsonl";
  if (s.size() > kPairs.size() && s.ends_with(kPairs)) {
    return s.substr(0, s.size() - kPairs.size());
  }
  return p;
}

}  // namespace

std::filesystem::path pairs_path(const std::filesystem::path& prefix) {
  return strip_suffix(prefix).string() + ".pairs.jsonl";
}

std::filesystem::path manifest_path(const std::filesystem::path& prefix) {
  return strip_suffix(prefix).string() + ".manifest.json";
}

std::string pairs_jsonl(const QuestionSet& qs) {
  std::string out;
  for (const auto& p : qs.pairs) out.append(to_json(p).dump()).push_back('\n');
  return out;
}

nlohmann::ordered_json manifest_json(const QuestionSet& qs) {
  const auto& m = qs.manifest;
  nlohmann::ordered_json j;
  j["run_id"] = qs.run_id;
  j["source_kind"] = to_string(qs.source_kind);
  j["doc_id"] = m.doc_id;
  j["backend"] = m.backend;
  j["token_counter"] = m.token_counter;
  j["token_limit"] = m.token_limit;
  j["chunk_token_limit"] = m.chunk_token_limit;
  j["seed"] = m.seed;
  j["dedupe"] = m.dedupe;
  j["roundtrip_filter"] = m.roundtrip_filter;
  j["summary_granularity"] = m.summary_granularity;
  j["sentence_count"] = m.sentence_count;
  j["pairs_before_filters"] = m.pairs_before_filters;
  j["pair_count"] = qs.pairs.size();
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["complete"] = !m.failure.has_value();
  j["failure"] = m.failure ? nlohmann::ordered_json(*m.failure) : nlohmann::ordered_json(nullptr);
  auto& rej = j["rejections"] = nlohmann::ordered_json::array();
  for (const auto& r : m.rejections) {
    rej.push_back({{"chunk_index", r.chunk_index},
                   {"sentence_index", r.sentence_index},
                   {"span", r.span},
                   {"reason", r.reason}});
  }
  auto& chunks = j["chunks"] = nlohmann::ordered_json::array();
  for (const auto& c : qs.chunks) {
    nlohmann::ordered_json cj;
    cj["author_id"] = c.author_id ? nlohmann::ordered_json(*c.author_id) : nlohmann::ordered_json(nullptr);
    cj["chapter_id"] = c.chapter_id;
    cj["section_ids"] = c.section_ids;
    cj["chunk_index"] = c.chunk_index;
    cj["oversized"] = c.oversized;
    cj["text"] = c.text;
    chunks.push_back(std::move(cj));
  }
  return j;
}

void save_question_set(const QuestionSet& qs, const std::filesystem::path& prefix) {
  write_file(pairs_path(prefix), pairs_jsonl(qs));
  write_file(manifest_path(prefix), manifest_json(qs).dump(2) + "\n");
}

QuestionSet load_question_set(const std::filesystem::path& path) {
  QuestionSet qs;
  std::istringstream in(read_file(pairs_path(path)));
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      qs.pairs.push_back(qa_pair_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}:{}: {}", pairs_path(path).string(), line_no, e.what()),
                       line_no);
    }
    if (!ids.insert(qs.pairs.back().pair_id).second) {
      throw ParseError(fmt::format("{}:{}: duplicate pair_id '{}'",
                                   pairs_path(path).string(), line_no,
                                   qs.pairs.back().pair_id),
                       line_no);
    }
  }
  if (!qs.pairs.empty()) {
    qs.run_id = qs.pairs.front().run_id;
    qs.source_kind = qs.pairs.front().source_kind;
  }

  const auto mpath = manifest_path(path);
  if (!std::filesystem::exists(mpath)) return qs;
  const auto j = nlohmann::json::parse(read_file(mpath));
  auto& m = qs.manifest;
  qs.run_id = j.value("run_id", qs.run_id);
  if (j.contains("source_kind")) {
    qs.source_kind = parse_source_kind(j["source_kind"].get<std::string>());
  }
  m.doc_id = j.value("doc_id", "");
  m.backend = j.value("backend", nlohmann::json::object());
  m.token_counter = j.value("token_counter", "whitespace");
  m.token_limit = j.value("token_limit", segmentation::kDefaultTokenLimit);
  m.chunk_token_limit = j.value("chunk_token_limit", m.token_limit);
  m.seed = j.value("seed", std::uint64_t{0});
  m.dedupe = j.value("dedupe", false);
  m.roundtrip_filter = j.value("roundtrip_filter", false);
  m.summary_granularity = j.value("summary_granularity", "chapter");
  m.sentence_count = j.value("sentence_count", std::size_t{0});
  m.pairs_before_filters = j.value("pairs_before_filters", std::size_t{0});
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  if (j.contains("failure") && j["failure"].is_string()) {
    m.failure = j["failure"].get<std::string>();
  }
  for (const auto& r : j.value("rejections", nlohmann::json::array())) {
    m.rejections.push_back({r.value("chunk_index", std::size_t{0}),
                            r.value("sentence_index", std::size_t{0}),
                            r.value("span", ""), r.value("reason", "")});
  }
  for (const auto& c : j.value("chunks", nlohmann::json::array())) {
    ChunkRecord rec;
    if (c.contains("author_id") && c["author_id"].is_string()) {
      rec.author_id = c["author_id"].get<std::string>();
    }
    rec.chapter_id = c.value("chapter_id", "");
    rec.section_ids = c.value("section_ids", std::vector<std::string>{});
    rec.chunk_index = c.value("chunk_index", std::size_t{0});
    rec.oversized = c.value("oversized", false);
    rec.text = c.value("text", "");
    qs.chunks.push_back(std::move(rec));
  }
  return qs;
}

void save_eval_set(const EvalSet& e, const std::filesystem::path& path) {
  write_file(path, to_json(e).dump(2) + "\n");
}

EvalSet load_eval_set(const std::filesystem::path& path) {
  return eval_set_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace flashqg::pipeline
