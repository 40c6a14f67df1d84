#pragma once

// Logistic distribution, Kolmogorov-Smirnov goodness of fit, and Monte Carlo
// checks of the latent toy model against its closed forms.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rephrasecal/client.hpp"

namespace rephrasecal {

struct LogisticParams {
  double mu = 0.0;
  double s = 1.0;
};

double logistic_cdf(double x, const LogisticParams& p = {});
/// Throws std::domain_error unless 0 < prob < 1.
double logistic_quantile(double prob, const LogisticParams& p = {});

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  /// Fraction of samples <= x.
  double operator()(double x) const;
  std::span<const double> sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Two-sided KS distance between the samples and a continuous CDF, evaluated
/// on both sides of every step. Throws std::invalid_argument on empty input.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
double ks_statistic(std::span<const double> samples, const LogisticParams& params);

/// Asymptotic 5% critical value 1.36 / sqrt(n).
double ks_critical_value_5pct(std::size_t n);

struct LogisticFitCheck {
  double d = 0.0;
  double critical = 0.0;
  bool pass = false;  // d < critical
};

/// KS test of latent projections against logistic(0, 1). Needs at least 20 samples.
LogisticFitCheck logistic_fit_check(std::span<const double> projections);

/// Latent gap w.z_mean + b implied by an observed majority probability.
/// Throws std::overflow_error for 0 or 1 and std::domain_error outside [0, 1].
double recover_latent_gap(double p_a);

/// 0.5 + (p - 0.5) / sqrt(s_topk^2 + s_rephrase^2), clipped to [0, 1].
double temper_forward(double p, double s_topk, double s_rephrase);
/// 0.5 + sqrt(s_topk^2 + s_rephrase^2) * (p_a - 0.5), clipped to [0, 1].
double temper_inverse(double p_a, double s_topk, double s_rephrase);

struct Prop1Report {
  double mc_p_a = 0.0;
  double analytic_p = 0.0;
  double abs_error = 0.0;
  bool argmax_agrees = false;
  std::uint64_t draws = 0;
};

/// Top-1 decoding with rephrasing noise only (s_rephrase = 1, s_topk = 0):
/// the MC frequency of class A against the softmax of the logits at z_mean.
Prop1Report verify_prop1(const LatentToyModel& model, std::uint64_t draws, std::uint64_t seed);

struct Prop2Report {
  double mc_p_a = 0.0;
  double linearized_p_a = 0.0;
  double exact_p_a = 0.0;
  double linearization_error = 0.0;
  double total_scale = 0.0;
  std::uint64_t draws = 0;
};

/// Top-k decoding of rephrased queries, total noise scale sqrt(s_topk^2 + s_rephrase^2).
Prop2Report verify_prop2(const LatentToyModel& model, std::uint64_t draws, std::uint64_t seed);

nlohmann::json to_json(const Prop1Report& r);
nlohmann::json to_json(const Prop2Report& r);
nlohmann::json to_json(const LogisticFitCheck& r);

/// `n` draws from logistic(mu, s) using one seeded stream.
std::vector<double> sample_logistic(std::size_t n, const LogisticParams& p, std::uint64_t seed);

}  // namespace rephrasecal
