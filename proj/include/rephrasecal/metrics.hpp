#pragma once

// Dataset-level calibration and discrimination metrics.
//
// The reductions (accuracy, Brier, reliability bins) run as OpenMP kernels over
// fixed-size blocks whose partial results are combined in block order, so the
// output is bit-identical for any thread count. The `serial` namespace holds
// plain-loop reference implementations used by tests and benchmarks.

#include <optional>
#include <span>
#include <vector>

#include "rephrasecal/core.hpp"

namespace rephrasecal {

struct ScoredItem {
  double confidence = 0.0;
  bool correct = false;
  std::vector<double> distribution;  // indexed by label, sums to 1
  ChoiceLabel gold;
};

/// Scores a summary against a gold label. An invalid prediction is incorrect.
ScoredItem score(const PredictionSummary& s, ChoiceLabel gold);

struct MetricOptions {
  int ece_bins = 10;
  int tace_bins = 10;
  double tace_threshold = 0.01;
};

class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double accuracy(std::span<const ScoredItem> items);

/// Equal-width bins on [0, 1], right-inclusive: bin b covers (b/B, (b+1)/B],
/// with 0 falling in the first bin.
int reliability_bin_index(double confidence, int num_bins);
std::vector<ReliabilityBin> reliability_bins(std::span<const ScoredItem> items, int num_bins = 10);

/// Weighted gap between mean confidence and accuracy over the reliability bins.
double ece(std::span<const ScoredItem> items, int num_bins = 10);
double ece_from_bins(std::span<const ReliabilityBin> bins);

/// Equal-mass bins over items with confidence above `threshold`; equal
/// confidences never straddle a bin edge. Mean over occupied bins of the
/// confidence/accuracy gap. Throws EmptyInputError when no item passes the
/// threshold.
double tace(std::span<const ScoredItem> items, int num_bins = 10, double threshold = 0.01);

/// Mean K-class squared error between the distribution and the one-hot gold.
double brier(std::span<const ScoredItem> items);

/// Mann-Whitney AUROC of confidence for separating correct from incorrect items,
/// ties counted one half. nullopt when one of the classes is empty.
std::optional<double> auroc(std::span<const ScoredItem> items);

CalibrationReport calibration_report(std::span<const ScoredItem> items,
                                     const MetricOptions& opts = {});

namespace serial {

double accuracy(std::span<const ScoredItem> items);
std::vector<ReliabilityBin> reliability_bins(std::span<const ScoredItem> items, int num_bins = 10);
double ece(std::span<const ScoredItem> items, int num_bins = 10);
double brier(std::span<const ScoredItem> items);

}  // namespace serial

}  // namespace rephrasecal
