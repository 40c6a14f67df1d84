#include <gtest/gtest.h>

#include <cmath>

#include "rephrasecal/stats.hpp"

using namespace rephrasecal;

namespace {

const double kLn3 = std::log(3.0);

// Sup distance by direct enumeration: at every sample point, count samples
// strictly below and at-or-below, and compare both step heights to F.
double ks_by_enumeration(const std::vector<double>& xs, double (*cdf)(double)) {
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (double x : xs) {
    int below = 0, at_or_below = 0;
    for (double y : xs) {
      below += y < x;
      at_or_below += y <= x;
    }
    d = std::max(d, std::abs(at_or_below / n - cdf(x)));
    d = std::max(d, std::abs(below / n - cdf(x)));
  }
  return d;
}

double std_logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(Logistic, CdfExamples) {
  EXPECT_DOUBLE_EQ(logistic_cdf(2.5, {2.5, 3.0}), 0.5);
  EXPECT_NEAR(logistic_cdf(kLn3), 0.75, 1e-15);
  EXPECT_THROW(logistic_cdf(0.0, {0.0, 0.0}), std::domain_error);
}

TEST(Logistic, QuantileExamplesAndIdentities) {
  EXPECT_DOUBLE_EQ(logistic_quantile(0.5, {1.25, 2.0}), 1.25);
  EXPECT_NEAR(logistic_quantile(0.75), kLn3, 1e-15);
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    EXPECT_NEAR(logistic_cdf(logistic_quantile(p)), p, 1e-14);
    EXPECT_NEAR(logistic_quantile(1.0 - p), -logistic_quantile(p), 1e-12);
    const LogisticParams shifted{-0.7, 1.9};
    EXPECT_NEAR(logistic_cdf(logistic_quantile(p, shifted), shifted), p, 1e-14);
  }
  EXPECT_THROW(logistic_quantile(0.0), std::domain_error);
  EXPECT_THROW(logistic_quantile(1.0), std::domain_error);
}

TEST(EmpiricalCdf, StepFunction) {
  const EmpiricalCdf f({3.0, 1.0, 2.0, 2.0});
  EXPECT_DOUBLE_EQ(f(0.5), 0.0);
  EXPECT_DOUBLE_EQ(f(2.0), 0.75);
  EXPECT_DOUBLE_EQ(f(3.0), 1.0);
}

TEST(Ks, SingleSampleAtCenter) {
  const std::vector<double> xs = {0.0};
  EXPECT_DOUBLE_EQ(ks_statistic(xs, LogisticParams{}), 0.5);
  EXPECT_THROW(ks_statistic(std::vector<double>{}, LogisticParams{}), std::invalid_argument);
}

TEST(Ks, FiveSamplesMatchEnumeration) {
  const std::vector<double> xs = {-1.2, 0.4, 0.4, 2.3, -0.05};
  EXPECT_NEAR(ks_statistic(xs, LogisticParams{}), ks_by_enumeration(xs, std_logistic), 1e-15);
  const std::vector<double> ys = {0.9, -3.0, 1.7, 0.2, 5.0};
  EXPECT_NEAR(ks_statistic(ys, LogisticParams{}), ks_by_enumeration(ys, std_logistic), 1e-15);
}

// Property: D is unchanged when the samples and the CDF are pushed through the
// same strictly increasing map.
TEST(Ks, InvariantUnderMonotoneMaps) {
  const auto xs = sample_logistic(200, {}, 5);
  std::vector<double> mapped;
  for (double x : xs) mapped.push_back(std::exp(x));
  const double d0 = ks_statistic(xs, LogisticParams{});
  const double d1 = ks_statistic(mapped, [](double y) { return std_logistic(std::log(y)); });
  EXPECT_NEAR(d0, d1, 1e-12);
}

TEST(Ks, ShrinksAsOneOverRootN) {
  int shrank = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double small = ks_statistic(sample_logistic(1000, {}, seed), LogisticParams{});
    const double large = ks_statistic(sample_logistic(100000, {}, seed + 1000), LogisticParams{});
    shrank += large < small;
  }
  EXPECT_GE(shrank, 90);
}

TEST(FitCheck, CriticalValueAndEdgeCases) {
  EXPECT_NEAR(ks_critical_value_5pct(100), 0.136, 1e-15);
  const std::vector<double> constant(50, 0.0);
  const auto r = logistic_fit_check(constant);
  EXPECT_GE(r.d, 0.5);
  EXPECT_FALSE(r.pass);
  EXPECT_THROW(logistic_fit_check(std::vector<double>(19, 0.0)), std::invalid_argument);
}

TEST(FitCheck, LogisticSamplesUsuallyPass) {
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) pass += logistic_fit_check(sample_logistic(100, {}, seed)).pass;
  EXPECT_GE(pass, 180);
}

TEST(RecoverGap, Examples) {
  EXPECT_DOUBLE_EQ(recover_latent_gap(0.5), 0.0);
  EXPECT_NEAR(recover_latent_gap(0.75), kLn3, 1e-15);
  EXPECT_THROW(recover_latent_gap(0.0), std::overflow_error);
  EXPECT_THROW(recover_latent_gap(1.0), std::overflow_error);
  EXPECT_THROW(recover_latent_gap(1.5), std::domain_error);
}

TEST(RecoverGap, FromToyDraws) {
  for (double g : {-2.0, -1.0, -0.3, 0.0, 0.5, 1.5, 2.0}) {
    const auto m = LatentToyModel::with_gap(g);
    const double p = static_cast<double>(count_class_a(m, 1.0, 100000, 42)) / 1e5;
    EXPECT_NEAR(recover_latent_gap(p), g, 0.03) << g;
  }
}

TEST(Temper, Examples) {
  EXPECT_DOUBLE_EQ(temper_forward(0.5, 0.3, 1.7), 0.5);
  EXPECT_NEAR(temper_forward(0.6, 0.0, 2.0), 0.55, 1e-15);
  EXPECT_NEAR(temper_forward(0.6, std::sqrt(3.0), 1.0), 0.55, 1e-15);
  EXPECT_DOUBLE_EQ(temper_inverse(0.5, 1.0, 1.0), 0.5);
  EXPECT_NEAR(temper_inverse(0.55, 0.0, 2.0), 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(temper_inverse(0.9, 0.0, 3.0), 1.0);
  EXPECT_THROW(temper_forward(0.6, 0.0, 0.0), std::domain_error);
}

TEST(Temper, InverseUndoesForward) {
  for (int i = 0; i <= 20; ++i) {
    const double p = i / 20.0;
    for (double s : {1.0, 1.3, 2.0}) EXPECT_NEAR(temper_inverse(temper_forward(p, 0.0, s), 0.0, s), p, 1e-14);
  }
}

TEST(Prop1, ZeroGap) {
  const auto r = verify_prop1(LatentToyModel::with_gap(0.0), 40000, 3);
  EXPECT_DOUBLE_EQ(r.analytic_p, 0.5);
  EXPECT_LT(std::abs(r.mc_p_a - 0.5), 3.0 / (2.0 * std::sqrt(40000.0)));
}

TEST(Prop1, LogThreeGap) {
  const auto r = verify_prop1(LatentToyModel::with_gap(kLn3), 100000, 1);
  EXPECT_NEAR(r.analytic_p, 0.75, 1e-15);
  EXPECT_LT(r.abs_error, 0.01);
  EXPECT_TRUE(r.argmax_agrees);
  EXPECT_THROW(verify_prop1(LatentToyModel::with_gap(1.0, 1.0, 0.5), 10, 0), std::invalid_argument);
}

TEST(Prop2, GapZeroIsFixedPoint) {
  const auto r = verify_prop2(LatentToyModel::with_gap(0.0, 1.0, 1.0), 1000, 0);
  EXPECT_DOUBLE_EQ(r.exact_p_a, 0.5);
  EXPECT_DOUBLE_EQ(r.linearized_p_a, 0.5);
}

TEST(Prop2, SixtyPercentAtScaleTwo) {
  // p = 0.6 means gap = logit(0.6); total scale 2 from s_rephrase = 2.
  const auto m = LatentToyModel::with_gap(logistic_quantile(0.6), 2.0, 0.0);
  const auto r = verify_prop2(m, 1000000, 9);
  EXPECT_NEAR(r.exact_p_a, 0.5505, 5e-5);
  EXPECT_NEAR(r.linearized_p_a, 0.55, 1e-15);
  EXPECT_LT(r.linearization_error, 0.005);
  EXPECT_NEAR(r.mc_p_a, r.exact_p_a, 0.002);
}

TEST(Reports, JsonKeys) {
  const auto j1 = to_json(verify_prop1(LatentToyModel::with_gap(1.0), 100, 0));
  for (const char* k : {"mcPA", "analyticP", "absError", "argmaxAgrees"}) EXPECT_TRUE(j1.contains(k)) << k;
  const auto j2 = to_json(verify_prop2(LatentToyModel::with_gap(1.0, 1.0, 1.0), 100, 0));
  for (const char* k : {"mcPA", "linearizedPA", "exactPA", "linearizationError"}) EXPECT_TRUE(j2.contains(k)) << k;
  const auto j3 = to_json(logistic_fit_check(sample_logistic(30, {}, 0)));
  for (const char* k : {"D", "critical", "pass@0.05"}) EXPECT_TRUE(j3.contains(k)) << k;
}
