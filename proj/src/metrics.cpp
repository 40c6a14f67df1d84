#include "rephrasecal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace rephrasecal {

namespace {

// Fixed block size: partials depend only on the data, never on thread count.
constexpr std::size_t kBlock = 4096;

std::size_t num_blocks(std::size_t n) { return (n + kBlock - 1) / kBlock; }

void require_nonempty(std::span<const ScoredItem> items, const char* what) {
  if (items.empty()) throw EmptyInputError(std::string(what) + ": no items");
}

double item_brier(const ScoredItem& it) {
  double s = 0.0;
  for (std::size_t l = 0; l < it.distribution.size(); ++l) {
    const double target = (static_cast<int>(l) == it.gold.index()) ? 1.0 : 0.0;
    const double d = it.distribution[l] - target;
    s += d * d;
  }
  // Gold outside the distribution support still costs its full unit.
  if (it.gold.index() >= static_cast<int>(it.distribution.size())) s += 1.0;
  return s;
}

struct BinAccumulator {
  std::vector<double> conf;
  std::vector<double> hits;
  std::vector<std::size_t> count;

  explicit BinAccumulator(int bins) : conf(bins, 0.0), hits(bins, 0.0), count(bins, 0) {}

  void add(const ScoredItem& it, int bins) {
    const int b = reliability_bin_index(it.confidence, bins);
    conf[b] += it.confidence;
    hits[b] += it.correct ? 1.0 : 0.0;
    ++count[b];
  }
  void merge(const BinAccumulator& o) {
    for (std::size_t b = 0; b < conf.size(); ++b) {
      conf[b] += o.conf[b];
      hits[b] += o.hits[b];
      count[b] += o.count[b];
    }
  }
};

std::vector<ReliabilityBin> finish_bins(const BinAccumulator& acc, int num_bins) {
  std::vector<ReliabilityBin> out(static_cast<std::size_t>(num_bins));
  for (int b = 0; b < num_bins; ++b) {
    auto& r = out[b];
    r.lower = static_cast<double>(b) / num_bins;
    r.upper = static_cast<double>(b + 1) / num_bins;
    r.count = acc.count[b];
    if (r.count > 0) {
      r.mean_confidence = acc.conf[b] / static_cast<double>(r.count);
      r.mean_accuracy = acc.hits[b] / static_cast<double>(r.count);
    }
  }
  return out;
}

}  // namespace

ScoredItem score(const PredictionSummary& s, ChoiceLabel gold) {
  ScoredItem it;
  it.confidence = s.confidence;
  it.correct = s.predicted.has_value() && *s.predicted == gold;
  it.distribution = s.distribution;
  it.gold = gold;
  return it;
}

int reliability_bin_index(double confidence, int num_bins) {
  if (!(confidence > 0.0)) return 0;
  int b = std::clamp(static_cast<int>(std::ceil(confidence * num_bins)) - 1, 0, num_bins - 1);
  // The product can round across an edge; settle against the edges themselves.
  if (b > 0 && confidence <= static_cast<double>(b) / num_bins) --b;
  if (b < num_bins - 1 && confidence > static_cast<double>(b + 1) / num_bins) ++b;
  return b;
}

double accuracy(std::span<const ScoredItem> items) {
  require_nonempty(items, "accuracy");
  const std::size_t blocks = num_blocks(items.size());
  std::vector<std::size_t> partial(blocks, 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(blocks); ++blk) {
    const std::size_t lo = blk * kBlock;
    const std::size_t hi = std::min(items.size(), lo + kBlock);
    std::size_t c = 0;
    for (std::size_t i = lo; i < hi; ++i) c += items[i].correct ? 1 : 0;
    partial[blk] = c;
  }
  const std::size_t total = std::accumulate(partial.begin(), partial.end(), std::size_t{0});
  return static_cast<double>(total) / static_cast<double>(items.size());
}

std::vector<ReliabilityBin> reliability_bins(std::span<const ScoredItem> items, int num_bins) {
  require_nonempty(items, "reliability_bins");
  if (num_bins < 1) throw std::invalid_argument("reliability_bins: need at least one bin");
  const std::size_t blocks = num_blocks(items.size());
  std::vector<BinAccumulator> partial(blocks, BinAccumulator(num_bins));
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(blocks); ++blk) {
    const std::size_t lo = blk * kBlock;
    const std::size_t hi = std::min(items.size(), lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) partial[blk].add(items[i], num_bins);
  }
  BinAccumulator total(num_bins);
  for (const auto& p : partial) total.merge(p);
  return finish_bins(total, num_bins);
}

double ece_from_bins(std::span<const ReliabilityBin> bins) {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  if (n == 0) throw EmptyInputError("ece: no items");
  double e = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    e += (static_cast<double>(b.count) / static_cast<double>(n)) *
         std::abs(b.mean_confidence - b.mean_accuracy);
  }
  return e;
}

double ece(std::span<const ScoredItem> items, int num_bins) {
  const auto bins = reliability_bins(items, num_bins);
  return ece_from_bins(bins);
}

double tace(std::span<const ScoredItem> items, int num_bins, double threshold) {
  require_nonempty(items, "tace");
  if (num_bins < 1) throw std::invalid_argument("tace: need at least one bin");
  std::vector<std::size_t> kept;
  kept.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].confidence > threshold) kept.push_back(i);
  }
  if (kept.empty()) throw EmptyInputError("tace: every item is below the threshold");
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return items[a].confidence < items[b].confidence;
  });

  const std::size_t n = kept.size();
  std::vector<double> conf(num_bins, 0.0), hits(num_bins, 0.0);
  std::vector<std::size_t> count(num_bins, 0);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    const double c = items[kept[start]].confidence;
    while (end < n && items[kept[end]].confidence == c) ++end;
    // A tie group lands wholly in the bin of its first rank.
    const auto b = static_cast<std::size_t>((start * static_cast<std::size_t>(num_bins)) / n);
    for (std::size_t r = start; r < end; ++r) {
      conf[b] += items[kept[r]].confidence;
      hits[b] += items[kept[r]].correct ? 1.0 : 0.0;
      ++count[b];
    }
    start = end;
  }
  double sum = 0.0;
  int occupied = 0;
  for (int b = 0; b < num_bins; ++b) {
    if (count[b] == 0) continue;
    const double m = static_cast<double>(count[b]);
    sum += std::abs(conf[b] / m - hits[b] / m);
    ++occupied;
  }
  return sum / occupied;
}

double brier(std::span<const ScoredItem> items) {
  require_nonempty(items, "brier");
  const std::size_t blocks = num_blocks(items.size());
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(blocks); ++blk) {
    const std::size_t lo = blk * kBlock;
    const std::size_t hi = std::min(items.size(), lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += item_brier(items[i]);
    partial[blk] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(items.size());
}

std::optional<double> auroc(std::span<const ScoredItem> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].confidence < items[b].confidence;
  });
  std::int64_t n_pos = 0;
  // Twice the rank sum of the correct items, so mid-ranks stay integral.
  std::int64_t twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && items[order[j]].confidence == items[order[i]].confidence) ++j;
    const auto twice_mid = static_cast<std::int64_t>(i + 1 + j);  // (i+1) + j, 1-based ranks
    for (std::size_t r = i; r < j; ++r) {
      if (items[order[r]].correct) {
        ++n_pos;
        twice_rank_sum += twice_mid;
      }
    }
    i = j;
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(items.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const std::int64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

CalibrationReport calibration_report(std::span<const ScoredItem> items, const MetricOptions& opts) {
  require_nonempty(items, "calibration_report");
  CalibrationReport r;
  r.num_items = items.size();
  r.accuracy = accuracy(items);
  r.bins = reliability_bins(items, opts.ece_bins);
  r.ece = ece_from_bins(r.bins);
  try {
    r.tace = tace(items, opts.tace_bins, opts.tace_threshold);
  } catch (const EmptyInputError&) {
    r.tace = std::nullopt;
  }
  r.brier = brier(items);
  r.auroc = auroc(items);
  return r;
}

namespace serial {

double accuracy(std::span<const ScoredItem> items) {
  require_nonempty(items, "accuracy");
  std::size_t c = 0;
  for (const auto& it : items) c += it.correct ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(items.size());
}

std::vector<ReliabilityBin> reliability_bins(std::span<const ScoredItem> items, int num_bins) {
  require_nonempty(items, "reliability_bins");
  if (num_bins < 1) throw std::invalid_argument("reliability_bins: need at least one bin");
  BinAccumulator acc(num_bins);
  for (const auto& it : items) acc.add(it, num_bins);
  return finish_bins(acc, num_bins);
}

double ece(std::span<const ScoredItem> items, int num_bins) {
  const auto bins = serial::reliability_bins(items, num_bins);
  return ece_from_bins(bins);
}

double brier(std::span<const ScoredItem> items) {
  require_nonempty(items, "brier");
  double s = 0.0;
  for (const auto& it : items) s += item_brier(it);
  return s / static_cast<double>(items.size());
}

}  // namespace serial

}  // namespace rephrasecal
