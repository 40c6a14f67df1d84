// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "prompt_goldens.hpp"
#include "rephrasecal/harness.hpp"
#include "rephrasecal/infer.hpp"
#include "rephrasecal/rephrase.hpp"
#include "rephrasecal/stats.hpp"

using namespace rephrasecal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig toy_config(StrategyKind kind, int draws, std::uint64_t seed) {
  RunConfig cfg;
  cfg.dataset = "toy";
  cfg.strategy.kind = kind;
  cfg.num_draws = draws;
  cfg.seed = seed;
  cfg.rephraser = cfg.answerer = "toy";
  return cfg;
}

Outcome naive_identities() {
  auto world = make_toy_world({.num_questions = 500, .seed = 2024});
  ToyBackend toy(world.models);
  const auto run = run_evaluation(toy_config(StrategyKind::kIdentity, 1, 7), world.questions, {toy, toy});
  const auto& r = *run.report;
  const double ece_gap = std::abs(r.ece - (1.0 - r.accuracy));
  const double brier_gap = std::abs(r.brier - 2.0 * (1.0 - r.accuracy));
  const bool auroc_ok = !r.auroc || *r.auroc == 0.5;
  return {run.parse_failures == 0 && ece_gap <= 1e-12 && brier_gap <= 1e-12 && auroc_ok,
          fmt("acc=%.4f |ece-(1-acc)|=%.1e |brier-2(1-acc)|=%.1e auroc=%s", r.accuracy, ece_gap,
              brier_gap, r.auroc ? fmt("%.3f", *r.auroc).c_str() : "absent")};
}

Outcome auroc_oracle() {
  std::mt19937_64 rng(5);
  int checked = 0, mismatches = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 99;
    std::vector<ScoredItem> items;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = static_cast<double>(rng() % 11) / 10.0;  // coarse grid forces ties
      items.push_back(oracle::item(c, rng() % 2 == 0));
    }
    const auto a = auroc(items);
    if (!a) continue;
    ++checked;
    mismatches += *a != oracle::pairwise_auroc(items);
  }
  return {mismatches == 0 && checked > 250, fmt("%d sets with ties, %d exact mismatches", checked, mismatches)};
}

Outcome prop1() {
  const auto r = verify_prop1(LatentToyModel::with_gap(std::log(3.0)), 100000, 11);
  int worst_agree = 200;
  for (double gap : {0.21, -0.21, 0.5, -1.0, 2.0}) {
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      agree += verify_prop1(LatentToyModel::with_gap(gap), 10000, derive_seed(seed, {99})).argmax_agrees;
    }
    worst_agree = std::min(worst_agree, agree);
  }
  return {r.abs_error < 0.01 && worst_agree >= 198,
          fmt("gap ln3: mc=%.4f analytic=%.4f err=%.4f; argmax agreement (worst gap) %d/200", r.mc_p_a,
              r.analytic_p, r.abs_error, worst_agree)};
}

Outcome prop2() {
  double worst_lin = 0.0, worst_mc = 0.0;
  std::uint64_t seed = 0;
  for (double p : {0.3, 0.4, 0.5, 0.6, 0.7}) {
    for (double scale : {1.0, 1.5, 2.0}) {
      // Split the total scale between top-k and rephrasing noise.
      const auto m = LatentToyModel::with_gap(logistic_quantile(p), 0.8 * scale, 0.6 * scale);
      const auto r = verify_prop2(m, 100000, ++seed);
      worst_lin = std::max(worst_lin, r.linearization_error);
      worst_mc = std::max(worst_mc, std::abs(r.mc_p_a - r.exact_p_a));
    }
  }
  const auto ex = verify_prop2(LatentToyModel::with_gap(logistic_quantile(0.6), 2.0, 0.0), 100000, 77);
  return {worst_lin <= 0.05 && worst_mc <= 0.01,
          fmt("max linearization err=%.4f, max |mc-exact|=%.4f; p=0.6 s=2: exact=%.4f lin=%.4f", worst_lin,
              worst_mc, ex.exact_p_a, ex.linearized_p_a)};
}

Outcome calibrated_set() {
  Rng rng(123);
  std::vector<ScoredItem> items;
  for (int i = 0; i < 100000; ++i) {
    const double c = uniform_open01(rng);
    items.push_back(oracle::item(c, uniform_open01(rng) < c));
  }
  const double e = ece(items), t = tace(items);
  return {e < 0.02 && t < 0.03, fmt("N=1e5: ece=%.4f tace=%.4f", e, t)};
}

Outcome ks() {
  int pass = 0, shifted_fail = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    pass += logistic_fit_check(sample_logistic(100, {}, seed)).pass;
    shifted_fail += !logistic_fit_check(sample_logistic(100, {1.5, 1.0}, seed + 100000)).pass;
  }
  return {pass >= 450 && shifted_fail >= 475,
          fmt("logistic pass %d/500, shifted fail %d/500", pass, shifted_fail)};
}

Outcome logits_parity() {
  auto world = make_toy_world({.num_questions = 500, .seed = 4242});
  ToyBackend toy(world.models);
  const auto cmp = compare_logits_oracle(toy_config(StrategyKind::kExpansion, 1000, 3), world.questions, toy, toy);
  const double de = std::abs(cmp.rephrase_report.ece - cmp.logits_report.ece);
  const double da = std::abs(*cmp.rephrase_report.auroc - *cmp.logits_report.auroc);
  return {de < 0.03 && da < 0.03,
          fmt("ece %.4f vs %.4f (diff %.4f), auroc %.4f vs %.4f (diff %.4f)", cmp.rephrase_report.ece,
              cmp.logits_report.ece, de, *cmp.rephrase_report.auroc, *cmp.logits_report.auroc, da)};
}

Outcome sweep() {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto world = make_toy_world({.num_questions = 500, .seed = 1000 + seed});
    ToyBackend toy(world.models);
    const auto rows = sweep_draws(toy_config(StrategyKind::kReword, 10, seed), world.questions, {toy, toy}, {1, 10});
    improved += rows[1].report->ece < rows[0].report->ece;
  }
  return {improved >= 45, fmt("ece(10) < ece(1) in %d/50 seeds", improved)};
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "rcal_acceptance";
  fs::remove_all(base);
  auto world = make_toy_world({.num_questions = 100, .seed = 55});
  ToyBackend toy(world.models);

  MockBackend mock;
  for (const auto& q : world.questions) {
    const auto prompt = build_rephrase_prompt({StrategyKind::kParaphrase}, q.stem);
    for (int v = 0; v < 2; ++v) {
      const std::string stem = "Paraphrase " + std::to_string(v) + " of " + q.id + "?";
      mock.add(prompt, stem);
      const auto answer = build_answer_prompt(assemble_rephrased_question(stem, q));
      for (const char* c : {"A", "The answer is B.", "C or D? C", "none"}) mock.add(answer, c);
    }
  }

  bool ok = true;
  int compared = 0;
  const auto check = [&](const std::string& name, CompletionBackend& backend, StrategyKind kind) {
    auto cfg = toy_config(kind, 10, 31);
    std::vector<fs::path> dirs;
    for (int threads : {1, 8}) {
      cfg.max_in_flight = threads;
      const auto dir = base / (name + std::to_string(threads));
      emit_report(run_evaluation(cfg, world.questions, {backend, backend}), dir);
      dirs.push_back(dir);
    }
    for (const char* f : {"raw.jsonl", "summary.json"}) {
      ok &= slurp(dirs[0] / f) == slurp(dirs[1] / f);
      ++compared;
    }
    const auto replayed = replay_raw_jsonl(dirs[0] / "raw.jsonl");
    ok &= dump_pretty(summary_json(replayed)) == slurp(dirs[0] / "summary.json");
    ++compared;
  };
  check("toy", toy, StrategyKind::kExpansion);
  check("mock", mock, StrategyKind::kParaphrase);
  fs::remove_all(base);
  return {ok, fmt("%d byte comparisons (toy+mock, 1 vs 8 in flight, replay)", compared)};
}

Outcome prompt_fidelity() {
  int checked = 0, bad = 0;
  for (const auto& [kind, text] : golden::kTemplates) {
    for (const std::string stem : {"{question}", "Which gas do plants absorb?", ""}) {
      ++checked;
      bad += build_rephrase_prompt({kind}, stem) != golden::fill(text, stem);
    }
  }
  Question q;
  q.id = "q";
  q.stem = "Pick one.";
  for (int i = 0; i < 4; ++i) q.choices.push_back({ChoiceLabel(i), "opt" + std::to_string(i)});
  for (std::size_t h = 0; h < 3; ++h) {
    for (int l = 0; l < 4; ++l) {
      ++checked;
      const auto text = render_hint_query(q, {h, ChoiceLabel(l)});
      const std::string suffix = "\n" + golden::kHints[h] + " " + ChoiceLabel(l).letter();
      bad += text.size() < suffix.size() || text.substr(text.size() - suffix.size()) != suffix;
    }
  }
  return {bad == 0, fmt("%d golden comparisons, %d mismatches", checked, bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 naive-baseline identities", naive_identities},
      {"2 auroc equals all-pairs oracle", auroc_oracle},
      {"3 majority vote recovers sigmoid", prop1},
      {"4 tempering linearization", prop2},
      {"5 calibrated set ece/tace", calibrated_set},
      {"6 ks logistic fit check", ks},
      {"7 rephrase vs logits parity", logits_parity},
      {"8 sample-count sweep trend", sweep},
      {"9 determinism and replay", determinism},
      {"10 prompt fidelity", prompt_fidelity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %-36s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
