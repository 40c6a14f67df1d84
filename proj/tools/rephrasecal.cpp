// Command-line front end: run, rephrase, metrics, sweep, simulate, compare-logits.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rephrasecal/harness.hpp"
#include "rephrasecal/stats.hpp"

using namespace rephrasecal;

namespace {

struct CommonOptions {
  std::string dataset = "toy:500";
  std::string strategy = "identity";
  std::string decode = "top1";
  int k = 40;
  double sampling_temp = 1.0;
  double rephrase_temp = 1.0;
  int draws = 10;
  std::uint64_t seed = 0;
  std::string rephraser;
  std::string answerer;
  std::string out;
  std::string templates;
  int max_in_flight = 8;
  MetricOptions metrics;
  ToyWorldOptions toy;
};

void add_metric_options(CLI::App* cmd, MetricOptions& m) {
  cmd->add_option("--ece-bins", m.ece_bins, "Equal-width ECE bins")->capture_default_str();
  cmd->add_option("--tace-bins", m.tace_bins, "Equal-mass TACE bins")->capture_default_str();
  cmd->add_option("--tace-threshold", m.tace_threshold, "TACE confidence threshold")->capture_default_str();
}

void add_common_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--dataset", o.dataset, "ARC-style JSONL file, or toy:<N> for a synthetic set")
      ->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "reword|rephrase|paraphrase|expansion|hint|identity")
      ->capture_default_str();
  cmd->add_option("--decode", o.decode, "top1|topk|temperature")->capture_default_str();
  cmd->add_option("--k", o.k, "k for top-k decoding")->capture_default_str();
  cmd->add_option("--sampling-temp", o.sampling_temp, "Answer sampling temperature")->capture_default_str();
  cmd->add_option("--temp", o.rephrase_temp, "Rephraser generation temperature")->capture_default_str();
  cmd->add_option("--draws", o.draws, "Draws per question")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Run seed")->capture_default_str();
  cmd->add_option("--rephraser-url", o.rephraser,
                  "Rephraser backend: toy, mock:<file>, or URL (default: same as answerer)");
  cmd->add_option("--answerer-url", o.answerer,
                  "Answerer backend: toy, mock:<file>, or URL (default: $RCAL_BASE_URL, else toy)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--templates", o.templates, "Directory of prompt template overrides");
  cmd->add_option("--max-in-flight", o.max_in_flight, "Concurrent requests")->capture_default_str();
  cmd->add_option("--toy-gap-spread", o.toy.gap_spread, "Toy: std. dev. of latent gaps")->capture_default_str();
  cmd->add_option("--toy-s-rephrase", o.toy.s_rephrase, "Toy: rephrasing noise scale")->capture_default_str();
  cmd->add_option("--toy-s-topk", o.toy.s_topk, "Toy: top-k noise scale")->capture_default_str();
  cmd->add_option("--toy-choices", o.toy.num_choices, "Toy: choices per question")->capture_default_str();
  cmd->add_option("--toy-dim", o.toy.latent_dim, "Toy: latent dimension")->capture_default_str();
  add_metric_options(cmd, o.metrics);
}

struct Prepared {
  RunConfig cfg;
  std::vector<Question> questions;
  BackendContext ctx;
  TemplateSet templates;
  std::shared_ptr<CompletionBackend> rephraser;
  std::shared_ptr<CompletionBackend> answerer;
};

Prepared prepare(const CommonOptions& o) {
  Prepared p;
  auto& cfg = p.cfg;
  cfg.dataset = o.dataset;
  cfg.strategy.kind = parse_strategy_kind(o.strategy);
  cfg.strategy.rephrase_temperature = o.rephrase_temp;
  cfg.decode.mode = parse_decode_mode(o.decode);
  cfg.decode.k = o.k;
  cfg.decode.sampling_temperature = o.sampling_temp;
  cfg.num_draws = o.draws;
  cfg.seed = o.seed;
  cfg.max_in_flight = o.max_in_flight;
  cfg.metrics = o.metrics;
  cfg.output_dir = o.out;

  auto toy = o.toy;
  toy.seed = o.seed;
  if (o.dataset.rfind("toy:", 0) == 0) {
    toy.num_questions = std::stoul(o.dataset.substr(4));
    auto world = make_toy_world(toy);
    p.questions = std::move(world.questions);
    p.ctx.toy_models = std::move(world.models);
  } else {
    auto loaded = load_arc_jsonl(o.dataset);
    if (loaded.skipped > 0) std::cerr << "skipped " << loaded.skipped << " invalid lines\n";
    p.questions = std::move(loaded.questions);
    p.ctx.toy_models = attach_toy_models(p.questions, toy);
  }
  p.ctx.remote = remote_config_from_env();
  p.ctx.remote.max_in_flight = o.max_in_flight;

  cfg.answerer = o.answerer;
  if (cfg.answerer.empty()) {
    const char* env = std::getenv("RCAL_ANSWERER_URL");
    cfg.answerer = env ? env : (p.ctx.remote.base_url.empty() ? "toy" : p.ctx.remote.base_url);
  }
  cfg.rephraser = o.rephraser;
  if (cfg.rephraser.empty()) {
    const char* env = std::getenv("RCAL_REPHRASER_URL");
    cfg.rephraser = env ? env : cfg.answerer;
  }
  p.answerer = make_backend(cfg.answerer, p.ctx);
  p.rephraser = cfg.rephraser == cfg.answerer ? p.answerer : make_backend(cfg.rephraser, p.ctx);
  if (!o.templates.empty()) p.templates = TemplateSet::load_directory(o.templates);
  return p;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

int cmd_run(const CommonOptions& o) {
  auto p = prepare(o);
  const auto run = run_evaluation(p.cfg, p.questions, {*p.rephraser, *p.answerer}, p.templates);
  if (!o.out.empty()) emit_report(run, o.out);
  std::cout << dump_pretty(summary_json(run));
  return 0;
}

int cmd_rephrase(const CommonOptions& o) {
  auto p = prepare(o);
  std::ostringstream out;
  for (std::size_t qi = 0; qi < p.questions.size(); ++qi) {
    const auto& q = p.questions[qi];
    for (int d = 0; d < p.cfg.num_draws; ++d) {
      nlohmann::json line = {{"questionId", q.id}, {"drawIndex", d}};
      try {
        line["question"] = prepare_query(p.cfg, q, qi, d, *p.rephraser, p.templates);
        line["error"] = nullptr;
      } catch (const BackendError& e) {
        line["question"] = nullptr;
        line["error"] = e.what();
      }
      out << line.dump() << '\n';
    }
  }
  if (o.out.empty()) {
    std::cout << out.str();
  } else {
    std::filesystem::create_directories(o.out);
    write_text(std::filesystem::path(o.out) / "rephrasings.jsonl", out.str());
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::vector<int>& counts) {
  auto p = prepare(o);
  p.cfg.num_draws = *std::max_element(counts.begin(), counts.end());
  const auto run = run_evaluation(p.cfg, p.questions, {*p.rephraser, *p.answerer}, p.templates);
  const auto rows = sweep_from_run(run, counts);
  const auto csv = sweep_csv(rows);
  if (!o.out.empty()) {
    emit_report(run, o.out);
    write_text(std::filesystem::path(o.out) / "sweep.csv", csv);
  }
  std::cout << csv;
  return 0;
}

int cmd_compare(const CommonOptions& o) {
  auto opts = o;
  if (opts.answerer.empty()) opts.answerer = "toy";
  if (opts.answerer != "toy") throw std::invalid_argument("compare-logits needs the toy answerer");
  auto p = prepare(opts);
  const auto& toy = dynamic_cast<const ToyBackend&>(*p.answerer);
  const auto cmp = compare_logits_oracle(p.cfg, p.questions, *p.rephraser, toy, p.templates);
  const nlohmann::json j = {{"rephraseReport", to_json(cmp.rephrase_report)},
                            {"logitsReport", to_json(cmp.logits_report)}};
  if (!o.out.empty()) {
    emit_report(cmp.run, o.out);
    write_text(std::filesystem::path(o.out) / "compare_logits.json", dump_pretty(j));
  }
  std::cout << dump_pretty(j);
  return 0;
}

struct SimOptions {
  double gap = std::log(3.0);
  double s_rephrase = 1.0;
  double s_topk = 0.0;
  std::uint64_t draws = 100000;
  std::uint64_t seed = 0;
  int dim = 8;
  std::size_t samples = 100;
  double shift = 0.0;
  int trials = 1;
};

int cmd_simulate(const std::string& which, const SimOptions& s) {
  Rng rng(derive_seed(s.seed, {static_cast<std::uint64_t>(Stream::kWorld)}));
  const auto model = LatentToyModel::random(s.dim, s.gap, s.s_rephrase, s.s_topk, rng);
  nlohmann::json out;
  if (which == "prop1") {
    out = to_json(verify_prop1(model, s.draws, s.seed));
  } else if (which == "prop2") {
    out = to_json(verify_prop2(model, s.draws, s.seed));
  } else if (which == "ks") {
    int passes = 0;
    nlohmann::json first;
    for (int t = 0; t < s.trials; ++t) {
      const auto xs = sample_logistic(s.samples, {s.shift, 1.0}, derive_seed(s.seed, {static_cast<std::uint64_t>(t)}));
      const auto r = logistic_fit_check(xs);
      if (t == 0) first = to_json(r);
      passes += r.pass ? 1 : 0;
    }
    out = first;
    out["trials"] = s.trials;
    out["passRate"] = static_cast<double>(passes) / s.trials;
  } else {
    throw std::invalid_argument("simulate: expected prop1, prop2 or ks");
  }
  std::cout << dump_pretty(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrated confidence for black-box multiple-choice answers via rephrased queries"};
  app.require_subcommand(1);

  CommonOptions run_o, rephrase_o, sweep_o, compare_o;
  auto* run = app.add_subcommand("run", "Evaluate a dataset end to end");
  add_common_options(run, run_o);

  auto* rephrase = app.add_subcommand("rephrase", "Emit rephrased questions only");
  add_common_options(rephrase, rephrase_o);

  std::string raw;
  MetricOptions metric_o;
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Recompute the summary from a raw JSONL log");
  metrics->add_option("--raw", raw, "raw.jsonl written by run")->required();
  metrics->add_option("--out", metrics_out, "Write summary.json here");
  add_metric_options(metrics, metric_o);

  std::vector<int> counts{1, 2, 5, 10};
  auto* sweep = app.add_subcommand("sweep", "Metrics against the number of draws");
  add_common_options(sweep, sweep_o);
  sweep->add_option("--draws-list", counts, "Draw counts to report")->delimiter(',')->capture_default_str();

  std::string which;
  SimOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Toy-model verifiers");
  simulate->add_option("which", which, "prop1 | prop2 | ks")->required();
  simulate->add_option("--gap", sim.gap, "Latent gap w.z_mean + b")->capture_default_str();
  simulate->add_option("--s-rephrase", sim.s_rephrase, "Rephrasing noise scale")->capture_default_str();
  simulate->add_option("--s-topk", sim.s_topk, "Top-k noise scale")->capture_default_str();
  simulate->add_option("--draws", sim.draws, "Monte Carlo draws")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  simulate->add_option("--dim", sim.dim, "Latent dimension")->capture_default_str();
  simulate->add_option("--samples", sim.samples, "ks: projections per trial")->capture_default_str();
  simulate->add_option("--shift", sim.shift, "ks: location shift of the projections")->capture_default_str();
  simulate->add_option("--trials", sim.trials, "ks: seeded trials")->capture_default_str();

  auto* compare = app.add_subcommand("compare-logits", "Rephrase ensemble against the toy logits oracle");
  add_common_options(compare, compare_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o);
    if (*rephrase) return cmd_rephrase(rephrase_o);
    if (*metrics) {
      const auto replay = replay_raw_jsonl(raw, metric_o);
      const auto text = dump_pretty(summary_json(replay));
      if (!metrics_out.empty()) {
        std::filesystem::create_directories(metrics_out);
        write_text(std::filesystem::path(metrics_out) / "summary.json", text);
      }
      std::cout << text;
      return 0;
    }
    if (*sweep) return cmd_sweep(sweep_o, counts);
    if (*simulate) return cmd_simulate(which, sim);
    if (*compare) return cmd_compare(compare_o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
