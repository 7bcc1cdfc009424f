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

// qg: command-line front end for ingesting textbook text, generating
// question sets, sampling evaluation sets, computing metrics and serving the
// annotation API.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "flashqg/annotation.hpp"
#include "flashqg/corpus.hpp"
#include "flashqg/error.hpp"
#include "flashqg/gateway.hpp"
#include "flashqg/metrics.hpp"
#include "flashqg/pipeline.hpp"
#include "flashqg/segmentation.hpp"
#include "flashqg/text.hpp"

namespace fs = std::filesystem;
using namespace flashqg;

namespace {

struct IngestArgs {
  std::string doc;
  std::string summaries;
  bool json = false;
};

struct GenerateArgs {
  std::string source = "original";
  std::string backend = "fake";
  std::size_t token_limit = segmentation::kDefaultTokenLimit;
  bool dedupe = false;
  bool roundtrip = false;
  std::string doc;
  std::string text_file;
  std::string summaries;
  std::string out;
  std::string granularity = "chapter";
  unsigned workers = 1;
  std::string run_id;
};

struct SampleArgs {
  std::vector<std::string> sets;
  std::size_t quota = 100;
  std::uint64_t seed = 0;
  std::string out;
};

struct CoverageArgs {
  std::string doc;
  std::vector<std::string> sets;
  std::vector<std::string> chapters;
  bool json = false;
};

struct AgreementArgs {
  std::string eval;
  std::vector<std::string> sets;
  std::string annotations;
  std::string annotators;
  bool json = false;
};

struct ReportArgs {
  std::string doc;
  std::vector<std::string> sets;
  std::string eval;
  std::string annotations;
  std::string annotators;
  std::string out;
};

struct ServeArgs {
  std::string eval;
  std::vector<std::string> sets;
  std::string annotators = "A1,A2,A3";
  std::string log;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string guidelines;
  std::string static_dir;
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  for (std::string part; std::getline(ss, part, ',');) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<pipeline::QuestionSet> load_sets(const std::vector<std::string>& paths) {
  std::vector<pipeline::QuestionSet> sets;
  for (const auto& p : paths) sets.push_back(pipeline::load_question_set(p));
  return sets;
}

// Key terms of the chapters an author summarized, each counted once.
std::vector<corpus::KeyTerm> terms_for_author(const corpus::SourceDocument& doc,
                                              const corpus::SummarySet& s) {
  std::vector<std::string> chapters;
  for (const auto& e : s.entries) {
    if (std::find(chapters.begin(), chapters.end(), e.chapter_id) == chapters.end()) {
      chapters.push_back(e.chapter_id);
    }
  }
  std::vector<corpus::KeyTerm> terms;
  for (const auto& c : chapters) {
    const auto t = doc.key_terms_for(c);
    terms.insert(terms.end(), t.begin(), t.end());
  }
  return corpus::unique_terms(terms);
}

int run_ingest(const IngestArgs& a) {
  const auto doc = corpus::load_document(a.doc);
  const auto& counter = segmentation::whitespace_counter();
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  auto chapters = nlohmann::ordered_json::array();
  std::size_t total_sentences = 0;
  for (const auto& ch : doc.chapters) {
    nlohmann::ordered_json cj;
    cj["chapter_id"] = ch.chapter_id;
    cj["title"] = ch.title;
    auto sections = nlohmann::ordered_json::array();
    for (const auto& s : ch.sections) {
      const auto sentences = segmentation::split_sentences(s.text, counter);
      std::size_t tokens = 0;
      for (const auto& x : sentences) tokens += x.token_count;
      total_sentences += sentences.size();
      sections.push_back(
          {{"section_id", s.section_id}, {"sentences", sentences.size()}, {"tokens", tokens}});
    }
    cj["sections"] = std::move(sections);
    auto terms = nlohmann::ordered_json::array();
    for (const auto& t : doc.key_terms_for(ch.chapter_id)) terms.push_back(t.surface);
    cj["key_terms"] = std::move(terms);
    chapters.push_back(std::move(cj));
  }
  j["chapters"] = std::move(chapters);
  j["sentence_count"] = total_sentences;
  j["key_term_count"] = corpus::unique_terms(doc.key_terms).size();

  auto stats = nlohmann::ordered_json::array();
  std::vector<std::tuple<std::string, corpus::SummaryStats>> rows;
  if (!a.summaries.empty()) {
    for (const auto& s : corpus::load_summary_sets(a.summaries)) {
      const auto st = corpus::summary_stats(s, terms_for_author(doc, s));
      rows.emplace_back(s.author_id, st);
      stats.push_back({{"author_id", s.author_id},
                       {"key_term_coverage", st.key_term_coverage},
                       {"total_sentences", st.total_sentences},
                       {"avg_sentence_length", st.avg_sentence_length}});
    }
  }
  j["summary_stats"] = std::move(stats);

  if (a.json) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  fmt::print("{}: {} chapters, {} sentences, {} key terms\n", doc.doc_id, doc.chapters.size(),
             total_sentences, corpus::unique_terms(doc.key_terms).size());
  if (!rows.empty()) {
    fmt::print("{:<10} {:>10} {:>10} {:>10}\n", "Summary", "Coverage", "Sentences",
               "Avg len");
    for (const auto& [author, st] : rows) {
      fmt::print("{:<10} {:>10} {:>10} {:>10.2f}\n", author,
                 metrics::format_pct(st.key_term_coverage), st.total_sentences,
                 st.avg_sentence_length);
    }
  }
  return 0;
}

int run_generate(const GenerateArgs& a) {
  const auto kind = pipeline::parse_source_kind(a.source);
  auto backend = gateway::make_backend(a.backend);
  pipeline::GenerateConfig cfg;
  cfg.token_limit = a.token_limit;
  cfg.dedupe = a.dedupe;
  cfg.roundtrip_filter = a.roundtrip;
  cfg.workers = a.workers;
  cfg.run_id = a.run_id;
  if (a.granularity == "section") {
    cfg.summary_granularity = pipeline::Granularity::section;
  } else if (a.granularity != "chapter") {
    throw PreconditionError(fmt::format("unknown granularity '{}'", a.granularity));
  }

  std::vector<corpus::SummarySet> summaries;
  if (!a.summaries.empty()) summaries = corpus::load_summary_sets(a.summaries);

  auto produce = [&] {
    if (!a.text_file.empty()) {
      return pipeline::generate_text(read_file(a.text_file), kind, *backend, cfg);
    }
    if (a.doc.empty()) throw PreconditionError("generate needs --doc or --text");
    return pipeline::generate(corpus::load_document(a.doc), kind, *backend, cfg, summaries);
  };

  const fs::path prefix =
      a.out.empty() ? fs::path(pipeline::to_string(kind)) : fs::path(a.out);
  try {
    const auto qs = produce();
    pipeline::save_question_set(qs, prefix);
    fmt::print("{}: {} pairs from {} sentences -> {}\n", qs.run_id, qs.pairs.size(),
               qs.manifest.sentence_count, pipeline::pairs_path(prefix).string());
    return 0;
  } catch (const pipeline::GenerationError& e) {
    pipeline::save_question_set(e.partial(), prefix);
    fmt::print(stderr, "error: {}; {} pairs kept in {}\n", e.what(), e.partial().pairs.size(),
               pipeline::pairs_path(prefix).string());
    return 2;
  }
}

int run_sample(const SampleArgs& a) {
  const auto eval = pipeline::sample_eval_set(load_sets(a.sets), a.quota, a.seed);
  const fs::path out = a.out.empty() ? fs::path(eval.eval_id + ".json") : fs::path(a.out);
  pipeline::save_eval_set(eval, out);
  fmt::print("{}: {} entries -> {}\n", eval.eval_id, eval.entries.size(), out.string());
  return 0;
}

std::vector<metrics::CoverageReport> coverage_rows(const std::string& doc_path,
                                                   const std::vector<std::string>& set_paths,
                                                   const std::vector<std::string>& chapters) {
  const auto doc = corpus::load_document(doc_path);
  std::vector<corpus::KeyTerm> terms;
  if (chapters.empty()) {
    terms = corpus::unique_terms(doc.key_terms);
  } else {
    for (const auto& c : chapters) {
      if (doc.find_chapter(c) == nullptr) {
        throw NotFoundError(fmt::format("chapter '{}' not in '{}'", c, doc_path));
      }
      const auto t = doc.key_terms_for(c);
      terms.insert(terms.end(), t.begin(), t.end());
    }
    terms = corpus::unique_terms(terms);
  }
  std::vector<metrics::CoverageReport> rows;
  for (const auto& qs : load_sets(set_paths)) rows.push_back(metrics::key_term_coverage(qs, terms));
  return rows;
}

int run_coverage(const CoverageArgs& a) {
  const auto rows = coverage_rows(a.doc, a.sets, a.chapters);
  if (a.json) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(metrics::to_json(r));
    std::cout << arr.dump(2) << "\n";
  } else {
    std::cout << metrics::render_coverage(rows);
  }
  return 0;
}

metrics::AgreementReport agreement(const std::string& eval_path,
                                   const std::vector<std::string>& set_paths,
                                   const std::string& annotations,
                                   const std::vector<std::string>& annotators) {
  const auto eval = pipeline::load_eval_set(eval_path);
  return metrics::agreement_report(annotation::load_export(annotations), eval,
                                   load_sets(set_paths), annotators);
}

int run_agreement(const AgreementArgs& a) {
  const auto rep = agreement(a.eval, a.sets, a.annotations, split_list(a.annotators));
  if (a.json) {
    std::cout << metrics::to_json(rep).dump(2) << "\n";
  } else {
    std::cout << metrics::render_agreement(rep) << "\n"
              << metrics::render_by_source(rep) << "\n"
              << metrics::render_by_chapter(rep);
  }
  return 0;
}

int run_report(const ReportArgs& a) {
  nlohmann::ordered_json j;
  std::string text;
  if (!a.doc.empty()) {
    const auto rows = coverage_rows(a.doc, a.sets, {});
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(metrics::to_json(r));
    j["coverage"] = std::move(arr);
    text += metrics::render_coverage(rows) + "\n";
  }
  if (!a.annotations.empty()) {
    if (a.eval.empty()) throw PreconditionError("report with --annotations needs --eval");
    const auto rep = agreement(a.eval, a.sets, a.annotations, split_list(a.annotators));
    j["agreement"] = metrics::to_json(rep);
    text += metrics::render_agreement(rep) + "\n" + metrics::render_by_source(rep) + "\n" +
            metrics::render_by_chapter(rep);
  }
  if (j.is_null()) throw PreconditionError("report needs --doc and/or --annotations");
  if (!a.out.empty()) write_file(a.out, j.dump(2) + "\n");
  std::cout << text;
  return 0;
}

int run_serve(const ServeArgs& a) {
  const auto eval = pipeline::load_eval_set(a.eval);
  const fs::path log = a.log.empty() ? fs::path(eval.eval_id + ".annotations.jsonl")
                                     : fs::path(a.log);
  annotation::AnnotationStore store(eval, load_sets(a.sets), split_list(a.annotators), log);
  annotation::ServerOptions opts;
  if (!a.guidelines.empty()) opts.guidelines = annotation::load_guidelines(a.guidelines);
  if (!a.static_dir.empty()) opts.static_dir = a.static_dir;
  annotation::AnnotationServer server(store, opts);

  // Signals are taken synchronously so stop() never runs in a handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  const int port = server.bind(a.host, a.port);
  if (port < 0) throw Error(fmt::format("cannot bind {}:{}", a.host, a.port));
  std::jthread runner([&] { server.run(); });
  fmt::print("listening on http://{}:{} (eval {}, {} items, log {})\n", a.host, port,
             eval.eval_id, eval.entries.size(), log.string());
  std::fflush(stdout);

  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flashcard question generation and evaluation"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse a document and report statistics");
  ingest_cmd->add_option("--doc", ingest.doc, "Plain-sections document")->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--summaries", ingest.summaries, "Summary JSON Lines file")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_flag("--json", ingest.json, "Print JSON");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a question set");
  gen_cmd->add_option("--source", gen.source, "original|human-summary|auto-summary")
      ->capture_default_str();
  gen_cmd->add_option("--backend", gen.backend, "fake|http|<plugin>")->capture_default_str();
  gen_cmd->add_option("--token-limit", gen.token_limit, "Backend input limit in tokens")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_flag("--dedupe", gen.dedupe, "Drop repeated (question, answer) pairs");
  gen_cmd->add_flag("--roundtrip-filter", gen.roundtrip,
                    "Keep pairs whose question is answered consistently");
  auto* doc_opt = gen_cmd->add_option("--doc", gen.doc, "Plain-sections document")
                      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--text", gen.text_file, "Raw text file (single passage)")
      ->check(CLI::ExistingFile)
      ->excludes(doc_opt);
  gen_cmd->add_option("--summaries", gen.summaries, "Summary JSON Lines (human-summary)")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output prefix (<out>.pairs.jsonl, <out>.manifest.json)");
  gen_cmd->add_option("--granularity", gen.granularity, "chapter|section (human-summary)")
      ->capture_default_str();
  gen_cmd->add_option("--workers", gen.workers, "Concurrent backend calls")
      ->capture_default_str()
      ->check(CLI::Range(1u, 256u));
  gen_cmd->add_option("--run-id", gen.run_id, "Override the derived run id");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample an evaluation set");
  sample_cmd->add_option("sets", sample.sets, "Question set files (.pairs.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  sample_cmd->add_option("--quota", sample.quota, "Pairs per source")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "Random seed")->capture_default_str();
  sample_cmd->add_option("--out", sample.out, "Output file");

  CoverageArgs cov;
  auto* cov_cmd = app.add_subcommand("coverage", "Key-term coverage per question set");
  cov_cmd->add_option("--doc", cov.doc, "Document with bolded key terms")->required()
      ->check(CLI::ExistingFile);
  cov_cmd->add_option("sets", cov.sets, "Question set files")->required()
      ->check(CLI::ExistingFile);
  cov_cmd->add_option("--chapter", cov.chapters, "Restrict key terms to chapters");
  cov_cmd->add_flag("--json", cov.json, "Print JSON");

  AgreementArgs agr;
  auto* agr_cmd = app.add_subcommand("agreement", "Annotator agreement and majority labels");
  agr_cmd->add_option("--eval", agr.eval, "Evaluation set")->required()
      ->check(CLI::ExistingFile);
  agr_cmd->add_option("--annotations", agr.annotations, "Exported annotations")->required()
      ->check(CLI::ExistingFile);
  agr_cmd->add_option("sets", agr.sets, "Question set files")->required()
      ->check(CLI::ExistingFile);
  agr_cmd->add_option("--annotators", agr.annotators, "Order, e.g. A1,A2,A3");
  agr_cmd->add_flag("--json", agr.json, "Print JSON");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Coverage and agreement in one document");
  rep_cmd->add_option("--doc", rep.doc, "Document with bolded key terms")
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("--eval", rep.eval, "Evaluation set")->check(CLI::ExistingFile);
  rep_cmd->add_option("--annotations", rep.annotations, "Exported annotations")
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("sets", rep.sets, "Question set files")->required()
      ->check(CLI::ExistingFile);
  rep_cmd->add_option("--annotators", rep.annotators, "Order, e.g. A1,A2,A3");
  rep_cmd->add_option("--out", rep.out, "JSON output file");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP service");
  serve_cmd->add_option("--eval", serve.eval, "Evaluation set")->required()
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("sets", serve.sets, "Question set files")->required()
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--annotators", serve.annotators, "Registered annotator ids")
      ->capture_default_str();
  serve_cmd->add_option("--log", serve.log, "Append-only annotation log");
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--guidelines", serve.guidelines, "Guideline JSON file")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--static", serve.static_dir, "Directory served at /")
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  // stdout carries command output; logs go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("qg"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*gen_cmd) return run_generate(gen);
    if (*sample_cmd) return run_sample(sample);
    if (*cov_cmd) return run_coverage(cov);
    if (*agr_cmd) return run_agreement(agr);
    if (*rep_cmd) return run_report(rep);
    if (*serve_cmd) return run_serve(serve);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
