#include "rephrasecal/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>

#include "rephrasecal/infer.hpp"
#include "rephrasecal/rng.hpp"

namespace rephrasecal {

namespace {

QuestionMeta meta_of(const Question& q) { return {q.id, q.num_choices(), q.gold}; }

std::uint64_t draw_seed(const RunConfig& cfg, std::size_t question_index, int draw_index) {
  return derive_seed(cfg.seed, {question_index, static_cast<std::uint64_t>(draw_index)});
}

DecodeConfig rephraser_decode(const Strategy& s) {
  return s.rephrase_temperature > 0.0 ? DecodeConfig::temperature(s.rephrase_temperature)
                                      : DecodeConfig::top1();
}

}  // namespace

std::string prepare_query(const RunConfig& cfg, const Question& q, std::size_t question_index,
                          int draw_index, CompletionBackend& rephraser,
                          const TemplateSet& templates) {
  const auto& strategy = cfg.strategy;
  const std::uint64_t seed = draw_seed(cfg, question_index, draw_index);
  switch (strategy.kind) {
    case StrategyKind::kIdentity:
      return assemble_rephrased_question(q.stem, q);
    case StrategyKind::kHint: {
      const std::uint64_t base = strategy.hint_seed ? static_cast<std::uint64_t>(*strategy.hint_seed)
                                                    : cfg.seed;
      Rng rng(derive_seed(base, {question_index, static_cast<std::uint64_t>(draw_index),
                                 static_cast<std::uint64_t>(Stream::kHint)}));
      return build_hint_query(q, rng);
    }
    default:
      break;
  }
  CompletionRequest req;
  req.prompt = build_rephrase_prompt(strategy, q.stem, templates);
  req.decode = rephraser_decode(strategy);
  req.max_tokens = 256;
  req.seed = derive_seed(seed, {static_cast<std::uint64_t>(Stream::kRephrase)});
  req.purpose = Purpose::kRephrase;
  req.question_id = q.id;
  const auto stem = clean_rephrasing(rephraser.complete(req));
  if (stem.empty()) throw BackendError("rephraser returned an empty question", false);
  return assemble_rephrased_question(stem, q);
}

RunRecord run_evaluation(const RunConfig& cfg, const std::vector<Question>& questions,
                         Backends backends, const TemplateSet& templates) {
  if (cfg.num_draws < 1) throw std::invalid_argument("run: num_draws must be >= 1");
  if (questions.empty()) throw std::invalid_argument("run: no questions");
  validate_decode(cfg.decode);
  for (const auto& q : questions) validate_question(q);

  const auto t0 = std::chrono::steady_clock::now();
  RunRecord run;
  run.config = cfg;
  run.questions.reserve(questions.size());
  for (const auto& q : questions) run.questions.push_back(meta_of(q));

  const std::size_t draws = static_cast<std::size_t>(cfg.num_draws);
  run.records.assign(questions.size(), std::vector<AnswerRecord>(draws));
  const std::int64_t tasks = static_cast<std::int64_t>(questions.size() * draws);
  const bool rephrased = cfg.strategy.kind != StrategyKind::kIdentity;

  std::exception_ptr fatal;
  std::mutex fatal_mu;

  // Draws are independent; every slot is written by exactly one task and every
  // random stream is derived from (seed, question, draw), so the result does
  // not depend on the thread count or schedule.
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, cfg.max_in_flight))
  for (std::int64_t t = 0; t < tasks; ++t) {
    const std::size_t qi = static_cast<std::size_t>(t) / draws;
    const int d = static_cast<int>(static_cast<std::size_t>(t) % draws);
    const auto& q = questions[qi];
    auto& rec = run.records[qi][d];
    rec.question_id = q.id;
    rec.draw_index = d;
    try {
      const auto text = prepare_query(cfg, q, qi, d, backends.rephraser, templates);
      rec.prompt = build_answer_prompt(text, templates.answer_template());
      CompletionRequest req;
      req.prompt = rec.prompt;
      req.decode = cfg.decode;
      req.max_tokens = cfg.max_tokens;
      req.seed = derive_seed(draw_seed(cfg, qi, d), {static_cast<std::uint64_t>(Stream::kAnswer)});
      req.purpose = Purpose::kAnswer;
      req.question_id = q.id;
      req.rephrased = rephrased;
      rec.completion = backends.answerer.complete(req);
      rec.extracted = extract_answer(rec.completion, q.num_choices());
    } catch (const BackendError& e) {
      rec.error = e.what();
      rec.extracted = std::nullopt;
    } catch (...) {
      std::lock_guard lock(fatal_mu);
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  summarize_run(run);
  const double total = static_cast<double>(tasks);
  if (static_cast<double>(run.backend_failures) > cfg.abort_failure_fraction * total) {
    throw RunAborted("run aborted: " + std::to_string(run.backend_failures) + " of " +
                     std::to_string(tasks) + " draws failed in the backend");
  }
  run.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

void summarize_run(RunRecord& run, std::optional<int> max_draws) {
  run.summaries.clear();
  run.backend_failures = 0;
  run.parse_failures = 0;
  std::vector<ScoredItem> items;
  for (std::size_t qi = 0; qi < run.questions.size(); ++qi) {
    const auto& meta = run.questions[qi];
    const auto& all = run.records[qi];
    std::size_t n = all.size();
    if (max_draws) n = std::min(n, static_cast<std::size_t>(*max_draws));
    if (n == 0) throw std::invalid_argument("question '" + meta.id + "' has no draws");
    const std::span<const AnswerRecord> used(all.data(), n);
    for (const auto& r : used) {
      if (r.error) {
        ++run.backend_failures;
      } else if (!r.extracted) {
        ++run.parse_failures;
      }
    }
    run.summaries.push_back(aggregate(used, meta.num_choices));
    if (meta.gold) items.push_back(score(run.summaries.back(), *meta.gold));
  }
  if (items.empty()) {
    run.report = std::nullopt;
  } else {
    run.report = calibration_report(items, run.config.metrics);
  }
}

std::vector<SweepRow> sweep_from_run(const RunRecord& run, const std::vector<int>& draw_counts) {
  std::vector<SweepRow> rows;
  for (int m : draw_counts) {
    if (m < 1 || m > run.config.num_draws) {
      throw std::invalid_argument("sweep: draw count " + std::to_string(m) + " outside [1, " +
                                  std::to_string(run.config.num_draws) + "]");
    }
    RunRecord copy = run;
    summarize_run(copy, m);
    rows.push_back({m, copy.report});
  }
  return rows;
}

std::vector<SweepRow> sweep_draws(RunConfig cfg, const std::vector<Question>& questions,
                                  Backends backends, std::vector<int> draw_counts,
                                  const TemplateSet& templates) {
  if (draw_counts.empty()) throw std::invalid_argument("sweep: empty draw list");
  cfg.num_draws = *std::max_element(draw_counts.begin(), draw_counts.end());
  const auto run = run_evaluation(cfg, questions, backends, templates);
  return sweep_from_run(run, draw_counts);
}

PredictionSummary logits_summary(const Question& q, const LatentToyModel& model) {
  const double p_a = softmax_a(toy_logits(model, model.z_mean));
  PredictionSummary s;
  s.question_id = q.id;
  s.counts.assign(q.num_choices(), 0);
  s.distribution.assign(q.num_choices(), 0.0);
  s.distribution[model.label_a.index()] = p_a;
  s.distribution[model.label_b.index()] = 1.0 - p_a;
  // Argmax over the two classes; an exact tie goes to the lower label.
  if (p_a > 0.5 || (p_a == 0.5 && model.label_a < model.label_b)) {
    s.predicted = model.label_a;
  } else {
    s.predicted = model.label_b;
  }
  s.confidence = std::max(p_a, 1.0 - p_a);
  return s;
}

LogitsComparison compare_logits_oracle(const RunConfig& cfg, const std::vector<Question>& questions,
                                       CompletionBackend& rephraser, const ToyBackend& answerer,
                                       const TemplateSet& templates) {
  // The run itself needs a mutable backend handle; the toy backend is stateless.
  ToyBackend toy(answerer.models());
  LogitsComparison out{run_evaluation(cfg, questions, {rephraser, toy}, templates), {}, {}};
  if (!out.run.report) throw std::invalid_argument("compare-logits: no question has a gold label");
  out.rephrase_report = *out.run.report;

  std::vector<ScoredItem> items;
  for (const auto& q : questions) {
    if (!q.gold) continue;
    items.push_back(score(logits_summary(q, answerer.model(q.id)), *q.gold));
  }
  out.logits_report = calibration_report(items, cfg.metrics);
  return out;
}

std::shared_ptr<CompletionBackend> make_backend(const std::string& spec, const BackendContext& ctx) {
  if (spec == "toy") return std::make_shared<ToyBackend>(ctx.toy_models);
  if (spec.rfind("mock:", 0) == 0) {
    return std::make_shared<MockBackend>(MockBackend::load_jsonl(spec.substr(5)));
  }
  RemoteConfig remote = ctx.remote;
  if (!spec.empty()) remote.base_url = spec;
  if (remote.base_url.rfind("http://", 0) != 0 && remote.base_url.rfind("https://", 0) != 0) {
    throw std::invalid_argument("backend '" + spec +
                                "': expected toy, mock:<file> or an http(s) URL");
  }
  return std::make_shared<RemoteBackend>(std::move(remote));
}

}  // namespace rephrasecal
