// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "rephrasecal/client.hpp"
#include "rephrasecal/metrics.hpp"
#include "rephrasecal/rng.hpp"

using namespace rephrasecal;

namespace {

std::vector<ScoredItem> make_items(std::size_t n) {
  Rng rng(1);
  std::vector<ScoredItem> items(n);
  for (auto& it : items) {
    const double c = uniform_open01(rng);
    it.confidence = c;
    it.correct = uniform_open01(rng) < c;
    it.gold = ChoiceLabel(0);
    it.distribution = {c, (1.0 - c) / 3, (1.0 - c) / 3, (1.0 - c) / 3};
  }
  return items;
}

template <auto Fn>
void run_metric(benchmark::State& state) {
  const auto items = make_items(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(items));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

double par_accuracy(std::span<const ScoredItem> s) { return accuracy(s); }
double ser_accuracy(std::span<const ScoredItem> s) { return serial::accuracy(s); }
double par_ece(std::span<const ScoredItem> s) { return ece(s, 10); }
double ser_ece(std::span<const ScoredItem> s) { return serial::ece(s, 10); }
double par_brier(std::span<const ScoredItem> s) { return brier(s); }
double ser_brier(std::span<const ScoredItem> s) { return serial::brier(s); }

template <bool Parallel>
void run_count(benchmark::State& state) {
  const auto m = LatentToyModel::with_gap(0.5);
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    ++seed;
    benchmark::DoNotOptimize(Parallel ? count_class_a(m, 1.0, n, seed) : serial::count_class_a(m, 1.0, n, seed));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(run_metric<ser_accuracy>)->Name("accuracy/serial")->Arg(1 << 20);
BENCHMARK(run_metric<par_accuracy>)->Name("accuracy/omp")->Arg(1 << 20);
BENCHMARK(run_metric<ser_ece>)->Name("ece/serial")->Arg(1 << 20);
BENCHMARK(run_metric<par_ece>)->Name("ece/omp")->Arg(1 << 20);
BENCHMARK(run_metric<ser_brier>)->Name("brier/serial")->Arg(1 << 20);
BENCHMARK(run_metric<par_brier>)->Name("brier/omp")->Arg(1 << 20);
BENCHMARK(run_count<false>)->Name("count_class_a/serial")->Arg(1 << 20);
BENCHMARK(run_count<true>)->Name("count_class_a/omp")->Arg(1 << 20);

BENCHMARK_MAIN();
