#include "topocmp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "topocmp/error.hpp"

namespace topocmp {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd_of(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double z_pvalue(double delta, double se) {
  if (!(se > 0.0)) throw ValidationError("standard error must be positive");
  return std::erfc(std::abs(delta / se) / std::numbers::sqrt2);
}

double ks_normal_statistic(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw ValidationError("KS statistic needs at least two samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double mu = mean_of(x);
  const double sd = sd_of(x, mu);
  if (!(sd > 0.0)) return 1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf((x[i] - mu) / sd);
    d = std::max({d, static_cast<double>(i + 1) / static_cast<double>(n) - f,
                  f - static_cast<double>(i) / static_cast<double>(n)});
  }
  return d;
}

double kolmogorov_tail(double lambda) noexcept {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

bool ks_normal_check(std::span<const double> samples, double level) {
  if (samples.size() < 20) throw ValidationError("KS normality check needs at least 20 samples");
  const double mu = mean_of(samples);
  if (!(sd_of(samples, mu) > 0.0)) return false;
  const double d = ks_normal_statistic(samples);
  return kolmogorov_tail(std::sqrt(static_cast<double>(samples.size())) * d) > level;
}

double empirical_pvalue(std::span<const double> null_deltas, double observed) {
  const std::size_t n = null_deltas.size();
  if (n < 100) throw ValidationError("empirical p-value needs at least 100 null draws");
  std::vector<double> x(null_deltas.begin(), null_deltas.end());
  std::sort(x.begin(), x.end());
  const double floor_p = 1.0 / static_cast<double>(n + 1);
  auto cdf = [&](double t) {
    return static_cast<double>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) /
           static_cast<double>(n);
  };

  const double mu = mean_of(x);
  const double sd = sd_of(x, mu);
  if (!(sd > 0.0)) return observed == x.front() ? 1.0 : floor_p;

  // Silverman's rule for the null density.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  auto density = [&](double t) {
    double s = 0.0;
    for (double v : x) {
      const double u = (t - v) / h;
      s += std::exp(-0.5 * u * u);
    }
    return s;  // unnormalized; only level comparisons are needed
  };

  // Density on a grid covering the data, mode by grid search.
  constexpr std::size_t kGrid = 1024;
  const double lo = x.front() - 4.0 * h, hi = x.back() + 4.0 * h;
  const double step = (hi - lo) / static_cast<double>(kGrid - 1);
  std::vector<double> f(kGrid);
  for (std::size_t g = 0; g < kGrid; ++g) f[g] = density(lo + static_cast<double>(g) * step);
  const auto mode_idx = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
  const double mode = lo + static_cast<double>(mode_idx) * step;

  const double t = observed;
  const double ft = density(t);
  // Walk away from the mode on the other side of t until the density drops
  // to f0(t); interpolate within the crossing cell.
  double t_star;
  if (t == mode) {
    t_star = t;
  } else {
    const bool go_left = t > mode;
    t_star = go_left ? lo - step : hi + step;
    std::size_t g = mode_idx;
    while (go_left ? g > 0 : g + 1 < kGrid) {
      const std::size_t next = go_left ? g - 1 : g + 1;
      if (f[next] <= ft) {
        const double span = f[g] - f[next];
        const double frac = span > 0.0 ? (f[g] - ft) / span : 0.0;
        const double a = lo + static_cast<double>(g) * step;
        t_star = a + (go_left ? -frac : frac) * step;
        break;
      }
      g = next;
    }
  }

  const double Ft = cdf(t), Fs = cdf(t_star);
  const double p = std::min(1.0 - Ft + Fs, 1.0 - Fs + Ft);
  return std::clamp(p, floor_p, 1.0);
}

std::size_t count_significant(std::span<const double> p_values, double alpha_level) {
  if (p_values.empty()) return 0;
  const double threshold = alpha_level / static_cast<double>(p_values.size());
  return static_cast<std::size_t>(
      std::count_if(p_values.begin(), p_values.end(), [&](double p) { return p < threshold; }));
}

TestReport make_report(std::vector<ParamDiff> diffs, double alpha_level) {
  if (!(alpha_level > 0.0 && alpha_level < 1.0))
    throw ValidationError("significance level must lie in (0, 1)");
  TestReport r;
  r.alpha_level = alpha_level;
  std::vector<double> p;
  for (const auto& d : diffs) {
    if (!(d.p_value >= 0.0 && d.p_value <= 1.0)) throw ValidationError("p-value outside [0, 1]");
    p.push_back(d.p_value);
  }
  r.significant_count = count_significant(p, alpha_level);
  r.diffs = std::move(diffs);
  return r;
}

TestReport compare_fits(const RstFit& fit1, const RstFit& fit2, double alpha_level) {
  if (fit1.K != fit2.K || fit1.theta.size() != fit2.theta.size() ||
      fit1.variances.size() != fit1.theta.size() || fit2.variances.size() != fit2.theta.size())
    throw ValidationError("fits have different cluster sizes");
  std::vector<ParamDiff> diffs;
  for (std::size_t j = 0; j < fit1.theta.size(); ++j) {
    ParamDiff d;
    d.j = j + 1;
    d.delta = fit1.theta[j] - fit2.theta[j];
    d.se = std::sqrt(fit1.variances[j] + fit2.variances[j]);
    d.p_value = z_pvalue(d.delta, d.se);
    diffs.push_back(d);
  }
  return make_report(std::move(diffs), alpha_level);
}

std::string to_json(const TestReport& report) {
  nlohmann::json j;
  j["diffs"] = nlohmann::json::array();
  for (const auto& d : report.diffs)
    j["diffs"].push_back({{"j", d.j}, {"delta", d.delta}, {"se", d.se}, {"p", d.p_value}});
  j["k"] = report.significant_count;
  j["decision"] = report.decision();
  return j.dump();
}

}  // namespace topocmp
