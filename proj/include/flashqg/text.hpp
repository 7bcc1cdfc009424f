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

#include <string>
#include <string_view>
#include <vector>

namespace flashqg::text {

/// Trims and collapses every run of ASCII whitespace to one space.
std::string collapse_whitespace(std::string_view s);

/// ASCII lowercase; bytes >= 0x80 pass through untouched.
std::string casefold(std::string_view s);

/// The matching key shared by key-term extraction, summary statistics and
/// coverage: whitespace-collapsed, then case-folded.
std::string match_key(std::string_view s);

/// True if `needle` occurs in `haystack` once both are reduced to match keys.
bool contains_normalized(std::string_view haystack, std::string_view needle);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_space(char c) noexcept;
bool is_upper(char c) noexcept;
bool is_punct(char c) noexcept;

/// Drops ASCII punctuation, case-folds and collapses whitespace.
std::string strip_punct_fold(std::string_view s);

/// Current UTC time as ISO-8601 with second precision ("2026-01-02T03:04:05Z").
std::string utc_timestamp();

}  // namespace flashqg::text
