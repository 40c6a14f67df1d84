#pragma once

// End-to-end runs: dataset ingestion, rephrase -> query -> extract -> aggregate
// -> score, draw-count sweeps, the logits-oracle comparison and persistence.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rephrasecal/client.hpp"
#include "rephrasecal/core.hpp"
#include "rephrasecal/metrics.hpp"
#include "rephrasecal/rephrase.hpp"

namespace rephrasecal {

// ---------------------------------------------------------------------------
// Datasets

struct ArcLoadResult {
  std::vector<Question> questions;
  std::size_t skipped = 0;
};

/// ARC / OpenBookQA JSONL: {"id", "question": {"stem", "choices": [{"text",
/// "label"}]}, "answerKey"}. Numeric labels "1".."8" become "A".."H". Lines
/// that fail to parse or validate are skipped and counted. Throws
/// std::runtime_error when the file is unreadable or nothing valid remains.
ArcLoadResult load_arc_jsonl(const std::filesystem::path& path);

struct ToyWorldOptions {
  std::size_t num_questions = 500;
  int num_choices = 4;
  double gap_spread = 2.0;  // standard deviation of the latent gap
  double s_rephrase = 1.0;
  double s_topk = 0.0;
  int latent_dim = 8;
  std::uint64_t seed = 0;
};

/// Synthetic questions paired with latent models. Each question's gold label is
/// the model's class A with probability sigmoid(gap), otherwise class B, so the
/// logits oracle is calibrated by construction.
struct ToyWorld {
  std::vector<Question> questions;
  std::map<std::string, LatentToyModel> models;
};

ToyWorld make_toy_world(const ToyWorldOptions& opts);

/// Latent models for existing questions, drawn from the same law as
/// make_toy_world conditioned on the recorded gold label.
std::map<std::string, LatentToyModel> attach_toy_models(const std::vector<Question>& questions,
                                                        const ToyWorldOptions& opts);

// ---------------------------------------------------------------------------
// Runs

struct RunConfig {
  std::string dataset;  // path, or "toy:<N>"
  Strategy strategy;
  DecodeConfig decode;
  int num_draws = 10;
  std::uint64_t seed = 0;
  int max_in_flight = 8;
  int max_tokens = 32;
  std::string rephraser;  // backend spec, recorded in the config snapshot
  std::string answerer;
  std::filesystem::path output_dir;
  MetricOptions metrics;
  double abort_failure_fraction = 0.5;
};

nlohmann::json to_json(const RunConfig& cfg);

struct QuestionMeta {
  std::string id;
  int num_choices = 4;
  std::optional<ChoiceLabel> gold;
};

struct RunRecord {
  RunConfig config;
  std::vector<QuestionMeta> questions;
  std::vector<std::vector<AnswerRecord>> records;  // [question][draw]
  std::vector<PredictionSummary> summaries;
  std::optional<CalibrationReport> report;  // absent when no question has a gold label
  std::size_t backend_failures = 0;
  std::size_t parse_failures = 0;
  double elapsed_seconds = 0.0;
};

class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Backends {
  CompletionBackend& rephraser;
  CompletionBackend& answerer;
};

/// Text of the query for one draw, before the answering instruction is added.
/// Calls the rephraser for the four rephrasing strategies.
std::string prepare_query(const RunConfig& cfg, const Question& q, std::size_t question_index,
                          int draw_index, CompletionBackend& rephraser,
                          const TemplateSet& templates);

/// Runs every draw of every question. Backend failures become unparsed draws;
/// throws RunAborted when more than cfg.abort_failure_fraction of draws fail.
RunRecord run_evaluation(const RunConfig& cfg, const std::vector<Question>& questions,
                         Backends backends, const TemplateSet& templates = TemplateSet());

/// Summaries, tallies and report for recorded draws, using only the first
/// `max_draws` draws of each question when given.
void summarize_run(RunRecord& run, std::optional<int> max_draws = std::nullopt);

struct SweepRow {
  int draws = 0;
  std::optional<CalibrationReport> report;
};

/// One run at max(draw_counts) draws, then one report per count from the first
/// m draws of each question.
std::vector<SweepRow> sweep_draws(RunConfig cfg, const std::vector<Question>& questions,
                                  Backends backends, std::vector<int> draw_counts,
                                  const TemplateSet& templates = TemplateSet());
std::vector<SweepRow> sweep_from_run(const RunRecord& run, const std::vector<int>& draw_counts);

/// Softmax of the toy logits at z_mean as confidence, argmax as prediction.
PredictionSummary logits_summary(const Question& q, const LatentToyModel& model);

struct LogitsComparison {
  RunRecord run;
  CalibrationReport rephrase_report;
  CalibrationReport logits_report;
};

/// Standard pipeline against the toy answerer, side by side with the
/// white-box logits oracle on the same questions.
LogitsComparison compare_logits_oracle(const RunConfig& cfg, const std::vector<Question>& questions,
                                       CompletionBackend& rephraser, const ToyBackend& answerer,
                                       const TemplateSet& templates = TemplateSet());

// ---------------------------------------------------------------------------
// Persistence

nlohmann::json to_json(const CalibrationReport& r);
nlohmann::json summary_json(const RunRecord& run);

nlohmann::json to_json(const AnswerRecord& r, const QuestionMeta& meta);

/// Writes summary.json, config.json, timing.json, questions.csv, bins.csv and
/// raw.jsonl into `dir`. Throws std::runtime_error if a file cannot be written.
void emit_report(const RunRecord& run, const std::filesystem::path& dir);

std::string raw_jsonl(const RunRecord& run);
std::string questions_csv(const RunRecord& run);
std::string bins_csv(const CalibrationReport& r);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Rebuilds a run from raw.jsonl and recomputes summaries and metrics.
RunRecord replay_raw_jsonl(const std::filesystem::path& path, const MetricOptions& opts = {});

/// Dumps JSON with two-space indent and a trailing newline.
std::string dump_pretty(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Backend construction

struct BackendContext {
  std::map<std::string, LatentToyModel> toy_models;
  RemoteConfig remote;
};

/// "toy", "mock:<fixtures.jsonl>", or an http(s) base URL.
std::shared_ptr<CompletionBackend> make_backend(const std::string& spec, const BackendContext& ctx);

}  // namespace rephrasecal
