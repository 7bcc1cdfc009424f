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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flashqg/segmentation.hpp"

namespace flashqg::corpus {

struct Section {
  std::string section_id;
  std::string text;
};

struct Chapter {
  std::string chapter_id;
  std::string title;
  std::vector<Section> sections;
};

struct KeyTerm {
  std::string surface;
  std::string chapter_id;

  bool operator==(const KeyTerm&) const = default;
};

/// A textbook chapter set. Section text has bold markers removed and
/// whitespace collapsed; the bolded spans are collected in `key_terms`.
struct SourceDocument {
  std::string doc_id;
  std::vector<Chapter> chapters;
  std::vector<KeyTerm> key_terms;

  const Chapter* find_chapter(std::string_view chapter_id) const;
  std::vector<KeyTerm> key_terms_for(std::string_view chapter_id) const;
};

struct SummaryEntry {
  std::string chapter_id;
  std::string section_id;
  std::string summary_text;
};

struct SummarySet {
  std::string author_id;
  std::vector<SummaryEntry> entries;
};

struct SummaryStats {
  double key_term_coverage = 0.0;
  std::size_t total_sentences = 0;
  double avg_sentence_length = 0.0;
};

/// Parses the plain-sections format:
///
///   ## <chapter_id> [title...]
///   ### <section_id>
///   body text, may contain **bolded key terms**
///
/// Errors (ParseError, offset = 1-based line number): missing file,
/// malformed header, body text outside a section, duplicate chapter or
/// section, empty section, empty document, unbalanced bold markers.
SourceDocument load_document(const std::filesystem::path& path);

/// Same as load_document but from an in-memory string.
SourceDocument parse_document(std::string_view content, std::string doc_id);

/// One KeyTerm per `**...**` span, whitespace collapsed and trimmed,
/// case-insensitive duplicates dropped (first occurrence wins). Empty spans
/// are ignored. Throws ParseError at the byte offset of an unclosed marker.
std::vector<KeyTerm> extract_key_terms(std::string_view marked_text,
                                       std::string_view chapter_id);

/// Removes `**` markers. Assumes they are balanced.
std::string strip_bold_markers(std::string_view marked_text);

/// Reads JSON Lines with fields author_id, chapter_id, section_id,
/// summary_text, grouping entries by author in order of first appearance.
std::vector<SummarySet> load_summary_sets(const std::filesystem::path& path);
std::vector<SummarySet> parse_summary_sets(std::string_view jsonl);

/// Key-term coverage of the concatenated summaries plus sentence statistics
/// (sentence lengths in space-delimited tokens). Each summary entry is split
/// on its own so that boundaries never straddle entries.
/// Throws PreconditionError("no key terms") on an empty term list.
SummaryStats summary_stats(const SummarySet& summaries,
                           const std::vector<KeyTerm>& key_terms);

/// Drops case-insensitive duplicates across chapters, keeping first
/// occurrences. Coverage over a whole document counts each term once.
std::vector<KeyTerm> unique_terms(const std::vector<KeyTerm>& terms);

}  // namespace flashqg::corpus
