#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "topocmp/rst.hpp"

namespace topocmp {

// Standard normal CDF.
double normal_cdf(double z) noexcept;

// Two-sided p-value 2 P(Z >= |delta / se|).
double z_pvalue(double delta, double se);

// One-sample Kolmogorov-Smirnov statistic of `samples` against a normal with
// the sample mean and standard deviation.
double ks_normal_statistic(std::span<const double> samples);
// Asymptotic Kolmogorov tail probability P(K > lambda).
double kolmogorov_tail(double lambda) noexcept;
// True when normality is not rejected at `level`. A sample with zero spread is
// rejected. Needs at least 20 samples.
bool ks_normal_check(std::span<const double> samples, double level = 0.05);

// Two-sided p-value of `observed` against an empirical null sample, matching
// densities on both sides of the mode: with f0 a Gaussian KDE of the null
// draws and F their empirical CDF, t* is the point across the mode with
// f0(t*) = f0(t), and
//   p = min[1 - F(t) + F(t*), 1 - F(t*) + F(t)],
// clamped to [1 / (n + 1), 1]. Needs at least 100 null draws.
double empirical_pvalue(std::span<const double> null_deltas, double observed);

struct ParamDiff {
  std::size_t j = 0;  // 1-based parameter index
  double delta = 0.0;
  double se = 0.0;
  double p_value = 1.0;
};

struct TestReport {
  std::vector<ParamDiff> diffs;
  double alpha_level = 0.05;
  std::size_t significant_count = 0;

  std::size_t K() const noexcept { return diffs.size(); }
  // Declared different only when every parameter differs.
  bool different() const noexcept { return !diffs.empty() && significant_count == diffs.size(); }
  std::string decision() const { return different() ? "Yes" : "No"; }
};

// Bonferroni count: #{j : p_j < alpha_level / K}.
std::size_t count_significant(std::span<const double> p_values, double alpha_level);

// Fills significant_count from the diffs' p-values.
TestReport make_report(std::vector<ParamDiff> diffs, double alpha_level);

// Per-parameter z-tests on theta_j^1 - theta_j^2 with
// se = sqrt(Var theta_j^1 + Var theta_j^2), Bonferroni over K.
TestReport compare_fits(const RstFit& fit1, const RstFit& fit2, double alpha_level = 0.05);

// {"diffs":[{"j","delta","se","p"}], "k", "decision"}
std::string to_json(const TestReport& report);

}  // namespace topocmp
