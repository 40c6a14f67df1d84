#include "rephrasecal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rephrasecal {

double logistic_cdf(double x, const LogisticParams& p) {
  if (!(p.s > 0.0)) throw std::domain_error("logistic scale must be positive");
  return 1.0 / (1.0 + std::exp(-(x - p.mu) / p.s));
}

double logistic_quantile(double prob, const LogisticParams& p) {
  if (!(p.s > 0.0)) throw std::domain_error("logistic scale must be positive");
  if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("logistic_quantile: p must lie in (0, 1)");
  return p.mu + p.s * std::log(prob / (1.0 - prob));
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic(std::span<const double> samples, const LogisticParams& params) {
  return ks_statistic(samples, [&](double x) { return logistic_cdf(x, params); });
}

double ks_critical_value_5pct(std::size_t n) { return 1.36 / std::sqrt(static_cast<double>(n)); }

LogisticFitCheck logistic_fit_check(std::span<const double> projections) {
  if (projections.size() < 20) {
    throw std::invalid_argument("logistic_fit_check: need at least 20 samples, got " +
                                std::to_string(projections.size()));
  }
  // The assumed law is logistic(0, 1), so standardization is the identity.
  LogisticFitCheck r;
  r.d = ks_statistic(projections, LogisticParams{0.0, 1.0});
  r.critical = ks_critical_value_5pct(projections.size());
  r.pass = r.d < r.critical;
  return r;
}

double recover_latent_gap(double p_a) {
  if (!(p_a >= 0.0 && p_a <= 1.0)) throw std::domain_error("recover_latent_gap: p_A outside [0, 1]");
  if (p_a == 0.0 || p_a == 1.0) {
    throw std::overflow_error("recover_latent_gap: p_A of 0 or 1 implies an infinite gap");
  }
  return logistic_quantile(p_a);
}

namespace {

double total_scale(double s_topk, double s_rephrase) {
  if (s_topk < 0.0 || s_rephrase < 0.0) throw std::domain_error("noise scales must be nonnegative");
  const double s = std::hypot(s_topk, s_rephrase);
  if (!(s > 0.0)) throw std::domain_error("at least one noise scale must be positive");
  return s;
}

}  // namespace

double temper_forward(double p, double s_topk, double s_rephrase) {
  const double s = total_scale(s_topk, s_rephrase);
  return std::clamp(0.5 + (p - 0.5) / s, 0.0, 1.0);
}

double temper_inverse(double p_a, double s_topk, double s_rephrase) {
  const double s = total_scale(s_topk, s_rephrase);
  return std::clamp(0.5 + s * (p_a - 0.5), 0.0, 1.0);
}

Prop1Report verify_prop1(const LatentToyModel& model, std::uint64_t draws, std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("verify_prop1: need at least one draw");
  if (model.s_rephrase != 1.0 || model.s_topk != 0.0) {
    throw std::invalid_argument("verify_prop1: needs s_rephrase = 1 and s_topk = 0");
  }
  const double scale = model.noise_scale(DecodeConfig::top1(), /*rephrased=*/true);
  Prop1Report r;
  r.draws = draws;
  r.mc_p_a = static_cast<double>(count_class_a(model, scale, draws, seed)) / static_cast<double>(draws);
  r.analytic_p = softmax_a(toy_logits(model, model.z_mean));
  r.abs_error = std::abs(r.mc_p_a - r.analytic_p);
  // Majority of the draws against the sign of the hyperplane at z_mean.
  const bool mc_says_a = r.mc_p_a > 0.5;
  const bool analytic_says_a = model.gap() > 0.0;
  r.argmax_agrees = mc_says_a == analytic_says_a;
  return r;
}

Prop2Report verify_prop2(const LatentToyModel& model, std::uint64_t draws, std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("verify_prop2: need at least one draw");
  Prop2Report r;
  r.draws = draws;
  r.total_scale = total_scale(model.s_topk, model.s_rephrase);
  const double scale = model.noise_scale(DecodeConfig::topk(40), /*rephrased=*/true);
  r.mc_p_a = static_cast<double>(count_class_a(model, scale, draws, seed)) / static_cast<double>(draws);
  r.exact_p_a = logistic_cdf(model.gap() / r.total_scale);
  r.linearized_p_a = temper_forward(model.analytic_p_a(), model.s_topk, model.s_rephrase);
  r.linearization_error = std::abs(r.exact_p_a - r.linearized_p_a);
  return r;
}

nlohmann::json to_json(const Prop1Report& r) {
  return {{"mcPA", r.mc_p_a},
          {"analyticP", r.analytic_p},
          {"absError", r.abs_error},
          {"argmaxAgrees", r.argmax_agrees},
          {"draws", r.draws}};
}

nlohmann::json to_json(const Prop2Report& r) {
  return {{"mcPA", r.mc_p_a},
          {"linearizedPA", r.linearized_p_a},
          {"exactPA", r.exact_p_a},
          {"linearizationError", r.linearization_error},
          {"totalScale", r.total_scale},
          {"draws", r.draws}};
}

nlohmann::json to_json(const LogisticFitCheck& r) {
  return {{"D", r.d}, {"critical", r.critical}, {"pass@0.05", r.pass}};
}

std::vector<double> sample_logistic(std::size_t n, const LogisticParams& p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double u = uniform_open01(rng);
    x = p.mu + p.s * std::log(u / (1.0 - u));
  }
  return out;
}

}  // namespace rephrasecal
