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

#include "flashqg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <tuple>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "flashqg/error.hpp"
#include "flashqg/text.hpp"

namespace flashqg::corpus {

namespace {

constexpr std::string_view kBold = "**";

// Returns 2 for a chapter header, 3 for a section header, 0 for body text.
int header_level(std::string_view line) {
  std::size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes != 2 && hashes != 3) return 0;
  if (hashes < line.size() && !text::is_space(line[hashes])) return 0;
  return static_cast<int>(hashes);
}

struct PendingSection {
  std::string id;
  std::string raw;
  std::size_t line = 0;
};

}  // namespace

const Chapter* SourceDocument::find_chapter(std::string_view chapter_id) const {
  for (const auto& ch : chapters) {
    if (ch.chapter_id == chapter_id) return &ch;
  }
  return nullptr;
}

std::vector<KeyTerm> SourceDocument::key_terms_for(
    std::string_view chapter_id) const {
  std::vector<KeyTerm> out;
  for (const auto& t : key_terms) {
    if (t.chapter_id == chapter_id) out.push_back(t);
  }
  return out;
}

std::vector<KeyTerm> extract_key_terms(std::string_view marked_text,
                                       std::string_view chapter_id) {
  std::vector<KeyTerm> out;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = marked_text.find(kBold, pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = marked_text.find(kBold, open + kBold.size());
    if (close == std::string_view::npos) {
      throw ParseError(fmt::format("unbalanced bold marker at offset {}", open),
                       open);
    }
    std::string surface = text::collapse_whitespace(
        marked_text.substr(open + kBold.size(), close - open - kBold.size()));
    if (!surface.empty() && seen.insert(text::casefold(surface)).second) {
      out.push_back({std::move(surface), std::string(chapter_id)});
    }
    pos = close + kBold.size();
  }
  return out;
}

std::string strip_bold_markers(std::string_view marked_text) {
  std::string out;
  out.reserve(marked_text.size());
  std::size_t pos = 0;
  while (pos < marked_text.size()) {
    const std::size_t hit = marked_text.find(kBold, pos);
    if (hit == std::string_view::npos) {
      out.append(marked_text.substr(pos));
      break;
    }
    out.append(marked_text.substr(pos, hit - pos));
    pos = hit + kBold.size();
  }
  return out;
}

std::vector<KeyTerm> unique_terms(const std::vector<KeyTerm>& terms) {
  std::vector<KeyTerm> out;
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (seen.insert(text::match_key(t.surface)).second) out.push_back(t);
  }
  return out;
}

SourceDocument parse_document(std::string_view content, std::string doc_id) {
  SourceDocument doc;
  doc.doc_id = std::move(doc_id);

  std::optional<PendingSection> pending;
  std::set<std::string> chapter_ids;
  std::set<std::string> section_ids;
  std::string chapter_raw;

  auto close_section = [&] {
    if (!pending) return;
    const std::string body = text::collapse_whitespace(pending->raw);
    if (strip_bold_markers(body).find_first_not_of(' ') == std::string::npos) {
      throw ParseError(fmt::format("line {}: empty section '{}'", pending->line,
                                   pending->id),
                       pending->line);
    }
    try {
      extract_key_terms(body, "");
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("line {}: section '{}': {}", pending->line,
                                   pending->id, e.what()),
                       pending->line);
    }
    doc.chapters.back().sections.push_back(
        {pending->id, text::collapse_whitespace(strip_bold_markers(body))});
    chapter_raw.append(body).push_back(' ');
    pending.reset();
  };
  auto close_chapter = [&] {
    close_section();
    if (doc.chapters.empty()) return;
    for (auto& term : extract_key_terms(chapter_raw, doc.chapters.back().chapter_id)) {
      doc.key_terms.push_back(std::move(term));
    }
    chapter_raw.clear();
  };

  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const int level = header_level(line);
    if (level == 0) {
      if (pending) {
        pending->raw.append(line).push_back('\n');
      } else if (!text::collapse_whitespace(line).empty()) {
        throw ParseError(fmt::format("line {}: text outside a section", line_no),
                         line_no);
      }
      continue;
    }
    const std::string rest = text::collapse_whitespace(
        std::string_view(line).substr(static_cast<std::size_t>(level)));
    if (rest.empty()) {
      throw ParseError(
          fmt::format("line {}: malformed header, missing id", line_no),
          line_no);
    }
    if (level == 2) {
      close_chapter();
      const std::size_t sp = rest.find(' ');
      Chapter ch;
      ch.chapter_id = rest.substr(0, sp);
      ch.title = sp == std::string::npos ? "" : rest.substr(sp + 1);
      if (!chapter_ids.insert(ch.chapter_id).second) {
        throw ParseError(fmt::format("line {}: duplicate chapter '{}'", line_no,
                                     ch.chapter_id),
                         line_no);
      }
      section_ids.clear();
      doc.chapters.push_back(std::move(ch));
    } else {
      if (doc.chapters.empty()) {
        throw ParseError(
            fmt::format("line {}: malformed header, section before any chapter",
                        line_no),
            line_no);
      }
      if (rest.find(' ') != std::string::npos) {
        throw ParseError(
            fmt::format("line {}: malformed header, section id has spaces",
                        line_no),
            line_no);
      }
      close_section();
      if (!section_ids.insert(rest).second) {
        throw ParseError(
            fmt::format("line {}: duplicate section '{}'", line_no, rest),
            line_no);
      }
      pending = PendingSection{rest, {}, line_no};
    }
  }
  close_chapter();

  if (doc.chapters.empty()) throw ParseError("empty document", 0);
  for (const auto& ch : doc.chapters) {
    if (ch.sections.empty()) {
      throw ParseError(
          fmt::format("chapter '{}' has no sections", ch.chapter_id), 0);
    }
  }
  return doc;
}

SourceDocument load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path.stem().string());
}

std::vector<SummarySet> parse_summary_sets(std::string_view jsonl) {
  std::vector<SummarySet> sets;
  std::set<std::tuple<std::string, std::string, std::string>> keys;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::collapse_whitespace(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("line {}: {}", line_no, e.what()), line_no);
    }
    auto field = [&](const char* name) {
      if (!obj.contains(name) || !obj[name].is_string()) {
        throw ParseError(
            fmt::format("line {}: missing string field '{}'", line_no, name),
            line_no);
      }
      return obj[name].get<std::string>();
    };
    const std::string author = field("author_id");
    SummaryEntry entry{field("chapter_id"), field("section_id"),
                       text::collapse_whitespace(field("summary_text"))};
    if (entry.summary_text.empty()) {
      throw ParseError(fmt::format("line {}: empty summary_text", line_no),
                       line_no);
    }
    if (!keys.emplace(author, entry.chapter_id, entry.section_id).second) {
      throw ParseError(fmt::format("line {}: duplicate summary for {}/{}/{}",
                                   line_no, author, entry.chapter_id,
                                   entry.section_id),
                       line_no);
    }
    auto it = std::find_if(sets.begin(), sets.end(),
                           [&](const SummarySet& s) { return s.author_id == author; });
    if (it == sets.end()) {
      sets.push_back({author, {}});
      it = std::prev(sets.end());
    }
    it->entries.push_back(std::move(entry));
  }
  return sets;
}

std::vector<SummarySet> load_summary_sets(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_summary_sets(buf.str());
}

SummaryStats summary_stats(const SummarySet& summaries,
                           const std::vector<KeyTerm>& key_terms) {
  if (key_terms.empty()) throw PreconditionError("no key terms");
  std::string all;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  for (const auto& e : summaries.entries) {
    all.append(e.summary_text).push_back(' ');
    for (const auto& s : segmentation::split_sentences(e.summary_text)) {
      ++sentences;
      tokens += text::split_whitespace(s.text).size();
    }
  }
  const std::string haystack = text::match_key(all);
  std::size_t covered = 0;
  for (const auto& t : key_terms) {
    const std::string key = text::match_key(t.surface);
    if (!key.empty() && haystack.find(key) != std::string::npos) ++covered;
  }
  SummaryStats stats;
  stats.key_term_coverage =
      static_cast<double>(covered) / static_cast<double>(key_terms.size());
  stats.total_sentences = sentences;
  stats.avg_sentence_length =
      sentences == 0 ? 0.0
                     : static_cast<double>(tokens) / static_cast<double>(sentences);
  return stats;
}

}  // namespace flashqg::corpus
