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

#include "flashqg/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "flashqg/error.hpp"
#include "flashqg/text.hpp"

namespace flashqg::annotation {

using metrics::Category;

// Short built-in prompts; full annotator instructions are supplied with
// load_guidelines().
std::vector<Guideline> default_guidelines() {
  return {
      {Category::acceptable, "Usable as a flashcard as is?",
       "Yes locks the remaining four categories to Yes. No requires a judgment on "
       "each of them."},
      {Category::grammatical, "Grammatical?", "Judge grammar only."},
      {Category::interpretable, "Understandable without the source passage?",
       "The passage is not shown; the textbook is available for reference."},
      {Category::relevant, "Relevant to the chapter?", "Judge importance to the chapter."},
      {Category::correct, "Answer correct?", "Judge the shown answer against the question."},
  };
}

nlohmann::ordered_json guidelines_json(const std::vector<Guideline>& g) {
  nlohmann::ordered_json j;
  auto& cats = j["categories"] = nlohmann::ordered_json::array();
  for (const auto& item : g) {
    nlohmann::ordered_json c;
    c["category"] = metrics::to_string(item.category);
    c["question"] = item.question;
    c["guideline"] = item.guideline;
    cats.push_back(std::move(c));
  }
  j["skip_rule"] =
      "acceptable = yes implies yes for every other category; acceptable = no "
      "requires all five answers";
  return j;
}

std::vector<Guideline> load_guidelines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  const auto j = nlohmann::json::parse(in);
  std::vector<Guideline> out;
  for (const auto& c : j.at("categories")) {
    const auto name = c.at("category").get<std::string>();
    std::optional<Category> cat;
    for (Category k : metrics::kCategories) {
      if (metrics::to_string(k) == name) cat = k;
    }
    if (!cat) throw ParseError(fmt::format("unknown category '{}'", name), 0);
    out.push_back({*cat, c.value("question", ""), c.value("guideline", "")});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct ParsedLog {
  std::vector<AnnotationRecord> records;
  std::size_t complete_bytes = 0;
  std::size_t torn_bytes = 0;
};

ParsedLog parse_log(const std::string& content, const std::filesystem::path& path) {
  ParsedLog out;
  const std::size_t last_nl = content.rfind('\n');
  out.complete_bytes = last_nl == std::string::npos ? 0 : last_nl + 1;
  out.torn_bytes = content.size() - out.complete_bytes;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < out.complete_bytes) {
    const std::size_t nl = content.find('\n', pos);
    const std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::collapse_whitespace(line).empty()) continue;
    try {
      out.records.push_back(metrics::record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(fmt::format("{}:{}: corrupt log line: {}", path.string(), line_no,
                                   e.what()),
                       line_no);
    }
  }
  return out;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<AnnotationRecord> replay_log(const std::filesystem::path& path,
                                         ReplayStats* stats) {
  const auto parsed = parse_log(read_all(path), path);
  std::map<std::pair<std::string, std::string>, AnnotationRecord> latest;
  for (const auto& r : parsed.records) {
    auto [it, inserted] = latest.try_emplace({r.pair_id, r.annotator_id}, r);
    if (!inserted && r.revision >= it->second.revision) it->second = r;
  }
  if (stats != nullptr) {
    stats->records = parsed.records.size();
    stats->torn_bytes = parsed.torn_bytes;
  }
  std::vector<AnnotationRecord> out;
  for (auto& [k, r] : latest) out.push_back(std::move(r));
  return out;
}

std::vector<AnnotationRecord> load_export(const std::filesystem::path& path) {
  const std::string content = read_all(path);
  if (content.empty() && !std::filesystem::exists(path)) {
    throw Error(fmt::format("cannot open '{}'", path.string()));
  }
  const auto first = content.find_first_not_of(" \t\r\n");
  std::vector<AnnotationRecord> out;
  if (first != std::string::npos && content[first] == '[') {
    for (const auto& j : nlohmann::json::parse(content)) {
      out.push_back(metrics::record_from_json(j));
    }
    return out;
  }
  return parse_log(content + (content.ends_with('\n') ? "" : "\n"), path).records;
}

AnnotationStore::AnnotationStore(pipeline::EvalSet eval_set,
                                 const std::vector<pipeline::QuestionSet>& sets,
                                 std::vector<std::string> annotators,
                                 std::filesystem::path log_path, Clock clock)
    : eval_(std::move(eval_set)),
      annotators_(std::move(annotators)),
      log_path_(std::move(log_path)),
      clock_(clock ? std::move(clock) : Clock(text::utc_timestamp)) {
  eval_ids_.insert(eval_.entries.begin(), eval_.entries.end());
  for (const auto& qs : sets) {
    for (const auto& p : qs.pairs) {
      if (eval_ids_.contains(p.pair_id)) qa_[p.pair_id] = {p.question, p.answer};
    }
  }
  for (const auto& id : eval_.entries) {
    if (!qa_.contains(id)) {
      throw NotFoundError(fmt::format("eval-set pair '{}' not in any question set", id));
    }
  }
  if (annotators_.empty()) throw PreconditionError("no annotators registered");
  replay();
}

AnnotationStore::~AnnotationStore() {
  if (fd_ >= 0) ::close(fd_);
}

void AnnotationStore::replay() {
  const std::string content = read_all(log_path_);
  const auto parsed = parse_log(content, log_path_);
  replay_.records = parsed.records.size();
  replay_.torn_bytes = parsed.torn_bytes;

  auto snap = std::make_shared<Snapshot>();
  for (const auto& r : parsed.records) {
    if (!eval_ids_.contains(r.pair_id)) {
      spdlog::warn("log record for pair '{}' outside the eval set, ignored", r.pair_id);
      continue;
    }
    try {
      metrics::expand_annotation(r.label);
    } catch (const PreconditionError& e) {
      spdlog::warn("log record {}/{} has an invalid label, ignored: {}", r.pair_id,
                   r.annotator_id, e.what());
      continue;
    }
    auto [it, inserted] = snap->latest.try_emplace({r.pair_id, r.annotator_id}, r);
    if (!inserted && r.revision >= it->second.revision) it->second = r;
  }
  snapshot_ = std::move(snap);

  fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(fmt::format("cannot open log '{}': {}", log_path_.string(),
                            std::strerror(errno)));
  }
  if (parsed.torn_bytes > 0) {
    spdlog::warn("dropping {} bytes of a torn final log line", parsed.torn_bytes);
    if (::ftruncate(fd_, static_cast<off_t>(parsed.complete_bytes)) != 0) {
      throw Error(fmt::format("cannot truncate log: {}", std::strerror(errno)));
    }
  }
}

void AnnotationStore::append_line(const std::string& line) {
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(fmt::format("log write failed: {}", std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(fmt::format("fsync failed: {}", std::strerror(errno)));
}

std::shared_ptr<const AnnotationStore::Snapshot> AnnotationStore::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

std::optional<QuestionView> AnnotationStore::next_question(
    std::string_view annotator_id) const {
  const std::string who(annotator_id);
  if (std::find(annotators_.begin(), annotators_.end(), who) == annotators_.end()) {
    throw NotFoundError(fmt::format("unknown annotator '{}'", who));
  }
  const auto snap = snapshot();
  for (std::size_t i = 0; i < eval_.entries.size(); ++i) {
    const auto& pid = eval_.entries[i];
    if (snap->latest.contains({pid, who})) continue;
    const auto& [q, a] = qa_.at(pid);
    return QuestionView{pid, q, a, i + 1, eval_.entries.size()};
  }
  return std::nullopt;
}

std::size_t AnnotationStore::record_annotation(const AnnotationRecord& record) {
  if (std::find(annotators_.begin(), annotators_.end(), record.annotator_id) ==
      annotators_.end()) {
    throw NotFoundError(fmt::format("unknown annotator '{}'", record.annotator_id));
  }
  if (!eval_ids_.contains(record.pair_id)) {
    throw NotFoundError(fmt::format("unknown pair '{}'", record.pair_id));
  }
  metrics::expand_annotation(record.label);

  std::lock_guard write_lock(write_mu_);
  const auto current = snapshot();
  AnnotationRecord stored = record;
  const Key key{record.pair_id, record.annotator_id};
  auto it = current->latest.find(key);
  stored.revision = it == current->latest.end() ? 1 : it->second.revision + 1;
  stored.submitted_at = clock_();
  append_line(metrics::to_json(stored).dump() + "\n");

  auto next = std::make_shared<Snapshot>(*current);
  next->latest[key] = stored;
  {
    std::lock_guard lock(snapshot_mu_);
    snapshot_ = std::move(next);
  }
  return stored.revision;
}

std::vector<AnnotationRecord> AnnotationStore::export_annotations(
    std::string_view eval_id) const {
  if (eval_id != eval_.eval_id) {
    throw NotFoundError(fmt::format("unknown eval set '{}'", eval_id));
  }
  const auto snap = snapshot();
  std::vector<AnnotationRecord> out;
  out.reserve(snap->latest.size());
  for (const auto& [key, r] : snap->latest) {
    AnnotationRecord e = r;
    e.label = metrics::expand_annotation(r.label);
    out.push_back(std::move(e));
  }
  return out;
}

std::string AnnotationStore::export_jsonl(std::string_view eval_id) const {
  std::string out;
  for (const auto& r : export_annotations(eval_id)) {
    out.append(metrics::to_json(r).dump()).push_back('\n');
  }
  return out;
}

std::vector<Progress> AnnotationStore::progress() const {
  const auto snap = snapshot();
  std::vector<Progress> out;
  for (const auto& a : annotators_) {
    Progress p{a, 0, 0};
    for (const auto& pid : eval_.entries) {
      if (snap->latest.contains({pid, a})) ++p.completed;
    }
    p.pending = eval_.entries.size() - p.completed;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace flashqg::annotation
