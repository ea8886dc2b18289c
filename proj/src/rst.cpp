#include "topocmp/rst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "optimize.hpp"
#include "rst_kernel.hpp"
#include "topocmp/error.hpp"

namespace topocmp {

namespace {

// exp(-690.78) == 1e-300
constexpr double kLogUnderflow = -690.7755278982137;

double log_sum_exp(std::span<const double> s) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : s) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : s) sum += std::exp(v - m);
  return m + std::log(sum);
}

// Positive-definite solve by Cholesky; returns the inverse, or empty when the
// matrix is not positive definite.
std::vector<double> spd_inverse(std::vector<double> a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return {};
    l[j * n + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / l[j * n + j];
    }
  }
  std::vector<double> inv(n * n, 0.0);
  std::vector<double> y(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = i == c ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * y[k];
      y[i] = s / l[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * inv[k * n + c];
      inv[i * n + c] = s / l[i * n + i];
    }
  }
  return inv;
}

}  // namespace

double distance(const TransformedPoint& a, const TransformedPoint& b) noexcept {
  return std::hypot(a.x1 - b.x1, a.x2 - b.x2);
}

TransformedPoints transform(const PersistenceDiagram& diagram) {
  if (diagram.empty()) throw ValidationError("cannot transform an empty diagram");
  TransformedPoints out;
  out.reserve(diagram.size());
  const bool super = diagram.direction == FiltrationDirection::SuperLevel;
  for (const auto& p : diagram.points) {
    const double x2 = super ? p.birth - p.death : p.death - p.birth;
    if (!(x2 >= 0.0)) throw ValidationError("diagram point is inconsistent with its direction");
    out.push_back({p.birth, x2});
  }
  return out;
}

std::vector<std::size_t> nearest_neighbors(std::span<const TransformedPoint> points,
                                           std::size_t i, std::size_t k) {
  if (k == 0 || k >= points.size())
    throw ValidationError("need more than k points for k nearest neighbours");
  std::vector<std::size_t> others;
  others.reserve(points.size() - 1);
  for (std::size_t j = 0; j < points.size(); ++j)
    if (j != i) others.push_back(j);
  std::vector<double> d(points.size());
  for (std::size_t j : others) d[j] = distance(points[i], points[j]);
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end(),
                    [&](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
  others.resize(k);
  return others;
}

double nn_stat(std::span<const TransformedPoint> points, std::size_t k) {
  if (k == 0 || points.size() <= k)
    throw ValidationError("nn_stat needs more than k points");
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = nearest_neighbors(points, i, k);
    total += distance(points[i], points[nn.back()]);
  }
  return total;
}

void RstConfig::validate() const {
  if (K == 0) throw ValidationError("cluster size K must be positive");
  if (!(alpha_min >= 0.0) || !(alpha_max > alpha_min))
    throw ValidationError("alpha range must be a nonempty subset of [0, inf)");
  if (diagram_kde_bandwidth && !(*diagram_kde_bandwidth > 0.0))
    throw ValidationError("diagram KDE bandwidth must be positive");
  if (integration_box) {
    const auto& b = *integration_box;
    if (!(b.x1_hi > b.x1_lo) || !(b.x2_hi > b.x2_lo) || b.x2_lo < 0.0)
      throw ValidationError("integration box must be a nondegenerate rectangle in R x R+");
  }
  if (quadrature_nodes[0] < 2 || quadrature_nodes[1] < 2)
    throw ValidationError("need at least 2 quadrature nodes per axis");
  if (max_outer_iterations == 0) throw ValidationError("max_outer_iterations must be positive");
}

DiagramKde::DiagramKde(TransformedPoints points, double bandwidth)
    : points_(std::move(points)), bandwidth_(bandwidth) {
  if (points_.empty()) throw ValidationError("diagram KDE needs points");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw DegenerateModelError("diagram KDE bandwidth is not positive");
}

double DiagramKde::log_eval(const TransformedPoint& z) const {
  const double inv2h2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : points_) {
    const double dx = z.x1 - p.x1, dy = z.x2 - p.x2;
    m = std::max(m, -(dx * dx + dy * dy) * inv2h2);
  }
  double sum = 0.0;
  for (const auto& p : points_) {
    const double dx = z.x1 - p.x1, dy = z.x2 - p.x2;
    sum += std::exp(-(dx * dx + dy * dy) * inv2h2 - m);
  }
  const double log_norm = -std::log(static_cast<double>(points_.size()) * 2.0 *
                                    std::numbers::pi * bandwidth_ * bandwidth_);
  return m + std::log(sum) + log_norm;
}

double DiagramKde::eval(const TransformedPoint& z) const { return std::exp(log_eval(z)); }

double silverman_bandwidth(std::span<const TransformedPoint> points) {
  const std::size_t n = points.size();
  if (n < 2) throw DegenerateModelError("bandwidth selection needs at least two points");
  double m1 = 0.0, m2 = 0.0;
  for (const auto& p : points) {
    m1 += p.x1;
    m2 += p.x2;
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  double v1 = 0.0, v2 = 0.0;
  for (const auto& p : points) {
    v1 += (p.x1 - m1) * (p.x1 - m1);
    v2 += (p.x2 - m2) * (p.x2 - m2);
  }
  const double var = (v1 + v2) / (2.0 * static_cast<double>(n - 1));
  const double h = std::sqrt(var) * std::pow(static_cast<double>(n), -1.0 / 6.0);
  if (!(h > 0.0) || !std::isfinite(h))
    throw DegenerateModelError("diagram points have no spread");
  return h;
}

QuadratureRule QuadratureRule::trapezoid(const Rect& box, std::array<std::size_t, 2> counts) {
  QuadratureRule rule;
  const std::size_t m1 = counts[0], m2 = counts[1];
  const double h1 = (box.x1_hi - box.x1_lo) / static_cast<double>(m1 - 1);
  const double h2 = (box.x2_hi - box.x2_lo) / static_cast<double>(m2 - 1);
  rule.nodes.reserve(m1 * m2);
  rule.weights.reserve(m1 * m2);
  for (std::size_t i = 0; i < m1; ++i) {
    const double w1 = (i == 0 || i + 1 == m1) ? 0.5 * h1 : h1;
    for (std::size_t j = 0; j < m2; ++j) {
      const double w2 = (j == 0 || j + 1 == m2) ? 0.5 * h2 : h2;
      rule.nodes.push_back({box.x1_lo + static_cast<double>(i) * h1,
                            box.x2_lo + static_cast<double>(j) * h2});
      rule.weights.push_back(w1 * w2);
    }
  }
  return rule;
}

double local_hamiltonian(const TransformedPoint& z, std::span<const TransformedPoint> neighbors,
                         std::span<const double> theta) {
  if (theta.size() > neighbors.size())
    throw ValidationError("need at least K neighbours for a K-term hamiltonian");
  double h = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) h += theta[k] * distance(z, neighbors[k]);
  return h;
}

double conditional_density(const TransformedPoint& x, std::span<const TransformedPoint> neighbors,
                           double alpha, std::span<const double> theta, const DiagramKde& kde,
                           const QuadratureRule& rule) {
  if (!(alpha >= 0.0)) throw ValidationError("alpha must be nonnegative");
  std::vector<double> s(rule.nodes.size());
  for (std::size_t q = 0; q < s.size(); ++q)
    s[q] = std::log(rule.weights[q]) + alpha * kde.log_eval(rule.nodes[q]) -
           local_hamiltonian(rule.nodes[q], neighbors, theta);
  const double log_den = log_sum_exp(s);
  if (!(log_den >= kLogUnderflow))
    throw DegenerateModelError("conditional density normalizer underflows");
  return std::exp(alpha * kde.log_eval(x) - local_hamiltonian(x, neighbors, theta) - log_den);
}

namespace {

DiagramKde make_kde(const TransformedPoints& points, const RstConfig& cfg) {
  const double h = cfg.diagram_kde_bandwidth ? *cfg.diagram_kde_bandwidth
                                             : silverman_bandwidth(points);
  return DiagramKde(points, h);
}

Rect make_box(const TransformedPoints& points, const RstConfig& cfg, double bandwidth) {
  if (cfg.integration_box) return *cfg.integration_box;
  Rect b{INFINITY, -INFINITY, INFINITY, -INFINITY};
  for (const auto& p : points) {
    b.x1_lo = std::min(b.x1_lo, p.x1);
    b.x1_hi = std::max(b.x1_hi, p.x1);
    b.x2_lo = std::min(b.x2_lo, p.x2);
    b.x2_hi = std::max(b.x2_hi, p.x2);
  }
  const double pad = 3.0 * bandwidth;
  b.x1_lo -= pad;
  b.x1_hi += pad;
  b.x2_lo = std::max(0.0, b.x2_lo - pad);
  b.x2_hi += pad;
  if (!(b.area() > 0.0) || !std::isfinite(b.area()))
    throw DegenerateModelError("integration box has zero area");
  return b;
}

}  // namespace

RstModel::RstModel(TransformedPoints points, const RstConfig& cfg)
    : points_(std::move(points)), K_(cfg.K), kde_(make_kde((cfg.validate(), points_), cfg)),
      box_(make_box(points_, cfg, kde_.bandwidth())),
      rule_(QuadratureRule::trapezoid(box_, cfg.quadrature_nodes)) {
  const std::size_t n = points_.size();
  if (n <= K_) throw ValidationError("RST model needs more than K points");
  const std::size_t q_count = rule_.nodes.size();

  log_weights_.resize(q_count);
  node_log_kde_.resize(q_count);
  for (std::size_t q = 0; q < q_count; ++q) {
    log_weights_[q] = std::log(rule_.weights[q]);
    node_log_kde_[q] = kde_.log_eval(rule_.nodes[q]);
  }

  point_log_kde_.resize(n);
  point_dist_.resize(n * K_);
  node_dist_.resize(n * q_count * K_);
  scale_.assign(K_, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    point_log_kde_[i] = kde_.log_eval(points_[i]);
    const auto nn = nearest_neighbors(points_, i, K_);
    for (std::size_t k = 0; k < K_; ++k) {
      point_dist_[i * K_ + k] = distance(points_[i], points_[nn[k]]);
      scale_[k] += point_dist_[i * K_ + k] / static_cast<double>(n);
    }
    for (std::size_t k = 0; k < K_; ++k)
      for (std::size_t q = 0; q < q_count; ++q)
        node_dist_[(i * K_ + k) * q_count + q] = distance(rule_.nodes[q], points_[nn[k]]);
  }
  for (auto& s : scale_)
    if (!(s > 0.0)) s = kde_.bandwidth();
  scratch_.resize(q_count);
}

double RstModel::log_partition(std::size_t i, double alpha, std::span<const double> theta) const {
  const std::size_t q_count = rule_.nodes.size();
  const double log_z = detail::rst_log_partition(log_weights_.data(), alpha, node_log_kde_.data(),
                                                 &node_dist_[i * K_ * q_count], theta.data(), K_,
                                                 q_count, scratch_.data());
  if (!(log_z >= kLogUnderflow) || !std::isfinite(log_z))
    throw DegenerateModelError("conditional density normalizer underflows");
  return log_z;
}

double RstModel::log_pl(double alpha, std::span<const double> theta) const {
  if (theta.size() != K_) throw ValidationError("theta must have K entries");
  double total = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double h = 0.0;
    for (std::size_t k = 0; k < K_; ++k) h += theta[k] * point_dist_[i * K_ + k];
    total += alpha * point_log_kde_[i] - h - log_partition(i, alpha, theta);
  }
  return total;
}

void RstModel::moments(std::size_t i, double alpha, std::span<const double> theta,
                       std::vector<double>& mean, std::vector<double>& second) const {
  const std::size_t q_count = rule_.nodes.size();
  const std::size_t p = K_ + 1;
  const double log_z = log_partition(i, alpha, theta);  // fills scratch_
  const double* dist = &node_dist_[i * K_ * q_count];
  mean.assign(p, 0.0);
  second.assign(p * p, 0.0);
  std::vector<double> t(p);
  for (std::size_t q = 0; q < q_count; ++q) {
    const double w = std::exp(scratch_[q] - log_z);
    t[0] = node_log_kde_[q];
    for (std::size_t k = 0; k < K_; ++k) t[k + 1] = -dist[k * q_count + q];
    for (std::size_t a = 0; a < p; ++a) {
      mean[a] += w * t[a];
      for (std::size_t b = 0; b < p; ++b) second[a * p + b] += w * t[a] * t[b];
    }
  }
}

std::vector<double> RstModel::gradient(double alpha, std::span<const double> theta) const {
  const std::size_t p = K_ + 1;
  std::vector<double> g(p, 0.0), mean, second;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    moments(i, alpha, theta, mean, second);
    g[0] += point_log_kde_[i] - mean[0];
    for (std::size_t k = 0; k < K_; ++k) g[k + 1] += -point_dist_[i * K_ + k] - mean[k + 1];
  }
  return g;
}

std::vector<double> RstModel::hessian(double alpha, std::span<const double> theta) const {
  const std::size_t p = K_ + 1;
  std::vector<double> h(p * p, 0.0), mean, second;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    moments(i, alpha, theta, mean, second);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) h[a * p + b] -= second[a * p + b] - mean[a] * mean[b];
  }
  return h;
}

std::vector<double> RstModel::point_scores(double alpha, std::span<const double> theta) const {
  const std::size_t p = K_ + 1;
  std::vector<double> s(points_.size() * p), mean, second;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    moments(i, alpha, theta, mean, second);
    s[i * p] = point_log_kde_[i] - mean[0];
    for (std::size_t k = 0; k < K_; ++k) s[i * p + k + 1] = -point_dist_[i * K_ + k] - mean[k + 1];
  }
  return s;
}

double log_pseudolikelihood(const TransformedPoints& points, double alpha,
                            std::span<const double> theta, const RstConfig& cfg) {
  if (!(alpha >= 0.0)) throw ValidationError("alpha must be nonnegative");
  return RstModel(points, cfg).log_pl(alpha, theta);
}

namespace {

// Central-difference Hessian of f over x with per-coordinate steps.
std::vector<double> fd_hessian(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x, const std::vector<double>& step) {
  const std::size_t n = x.size();
  std::vector<double> h(n * n);
  const double f0 = f(x);
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    auto y = x;
    y[i] += si;
    y[j] += sj;
    return f(y);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = step[i];
    h[i * n + i] = (at(i, hi, i, 0.0) - 2.0 * f0 + at(i, -hi, i, 0.0)) / (hi * hi);
    for (std::size_t j = 0; j < i; ++j) {
      const double hj = step[j];
      const double v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) +
                        at(i, -hi, j, -hj)) / (4.0 * hi * hj);
      h[i * n + j] = h[j * n + i] = v;
    }
  }
  return h;
}

}  // namespace

RstFit fit(const TransformedPoints& points, const RstConfig& cfg) {
  cfg.validate();
  if (points.size() <= cfg.K + 1) throw ValidationError("RST fit needs more than K + 1 points");
  const RstModel model(points, cfg);
  const std::size_t K = cfg.K;
  const auto& scale = model.neighbor_scale();

  double alpha = cfg.alpha_min;
  std::vector<double> theta(K, 0.0);

  // Best iterate, reported if the loop does not converge.
  double best_alpha = alpha, best_lp = -INFINITY;
  std::vector<double> best_theta = theta;
  auto record = [&](double lp) {
    if (lp > best_lp) {
      best_lp = lp;
      best_alpha = alpha;
      best_theta = theta;
    }
  };

  // alpha step: bisection on the central-difference slope of log_pl in alpha.
  // After the first pass the bracket starts around the previous alpha and
  // widens until it contains the sign change.
  double alpha_move = cfg.alpha_max - cfg.alpha_min;
  auto profile_alpha = [&](bool warm, double xtol) {
    const double h = 1e-6;
    auto slope = [&](double a) {
      return (model.log_pl(a + h, theta) - model.log_pl(a - h, theta)) / (2.0 * h);
    };
    double lo = cfg.alpha_min, hi = cfg.alpha_max;
    if (warm) {
      const double width = std::max(4.0 * alpha_move, 1e-4);
      lo = std::max(cfg.alpha_min, alpha - width);
      hi = std::min(cfg.alpha_max, alpha + width);
      if (lo > cfg.alpha_min && slope(lo) <= 0.0) lo = cfg.alpha_min;
      if (hi < cfg.alpha_max && slope(hi) >= 0.0) hi = cfg.alpha_max;
    }
    const double next = detail::bisect_decreasing(slope, lo, hi, xtol);
    alpha_move = std::abs(next - alpha);
    alpha = next;
  };
  // theta step: Nelder-Mead with alpha fixed. The value tolerance tracks the
  // last outer gain so early passes are cheap and the final ones are tight.
  auto profile_theta = [&](double step_factor, double ftol) {
    std::vector<double> steps(K);
    for (std::size_t k = 0; k < K; ++k) steps[k] = step_factor / scale[k];
    auto neg = [&](const std::vector<double>& th) { return -model.log_pl(alpha, th); };
    const bool tight = ftol <= 1e-10;
    auto res = detail::nelder_mead(neg, theta, steps, ftol, tight ? 1e-7 : 1e-3, 4000);
    theta = res.x;
    if (tight) {
      // Restart from the returned point; a collapsed simplex can stall.
      for (auto& s : steps) s *= 0.1;
      theta = detail::nelder_mead(neg, theta, steps, ftol, 1e-7, 4000).x;
    }
  };
  // Pattern move along the last outer step (alpha, theta) - (alpha0, theta0),
  // doubling while log_pl keeps improving. Block-coordinate ascent zigzags
  // when alpha and theta are correlated; this cuts the number of outer passes.
  auto pattern_move = [&](double alpha0, const std::vector<double>& theta0, double& lp) {
    double c = 1.0;
    while (c <= 64.0) {
      const double a = std::clamp(alpha + c * (alpha - alpha0), cfg.alpha_min, cfg.alpha_max);
      std::vector<double> th(K);
      for (std::size_t k = 0; k < K; ++k) th[k] = theta[k] + c * (theta[k] - theta0[k]);
      const double trial = model.log_pl(a, th);
      if (!(trial > lp)) break;
      // keep the accepted point and continue from it
      lp = trial;
      alpha = a;
      theta = th;
      c *= 2.0;
    }
  };

  profile_alpha(false, 1e-6);
  double prev = model.log_pl(alpha, theta);
  record(prev);
  double gain = INFINITY;
  bool converged = false;
  std::size_t iter = 0;
  while (iter < cfg.max_outer_iterations) {
    ++iter;
    const double alpha0 = alpha;
    const std::vector<double> theta0 = theta;
    const double ftol = std::isfinite(gain) ? std::clamp(1e-3 * gain, 1e-12, 1e-4) : 1e-4;
    profile_theta(iter == 1 ? 1.0 : 0.1, ftol);
    profile_alpha(iter > 1, ftol <= 1e-10 ? 1e-9 : 1e-6);
    double lp = model.log_pl(alpha, theta);
    if (ftol > 1e-10) pattern_move(alpha0, theta0, lp);
    record(lp);
    gain = std::abs(lp - prev);
    if (gain < cfg.tolerance && ftol <= 1e-10) {
      converged = true;
      break;
    }
    prev = lp;
  }
  if (!converged)
    throw FitFailedError("RST fit did not converge in " + std::to_string(iter) + " iterations",
                         best_alpha, best_theta, best_lp);

  RstFit out;
  out.alpha = alpha;
  out.theta = theta;
  out.log_pl = model.log_pl(alpha, theta);
  out.K = K;
  out.outer_iterations = iter;
  if (!std::isfinite(out.log_pl)) throw DegenerateModelError("log pseudolikelihood is not finite");

  // Observed information. When alpha sits on the edge of its range it is
  // treated as fixed and only the theta block is inverted.
  const bool alpha_interior = alpha > cfg.alpha_min + 1e-6 && alpha < cfg.alpha_max - 1e-6;
  std::vector<double> x, step;
  if (alpha_interior) {
    x.push_back(alpha);
    step.push_back(1e-4);
  }
  for (std::size_t k = 0; k < K; ++k) {
    x.push_back(theta[k]);
    step.push_back(1e-4 / scale[k]);
  }
  auto neg_lp = [&](const std::vector<double>& y) {
    const std::size_t off = alpha_interior ? 1 : 0;
    const double a = alpha_interior ? y[0] : alpha;
    return -model.log_pl(a, std::span<const double>(y).subspan(off));
  };
  const std::size_t n = x.size();
  const auto info = fd_hessian(neg_lp, x, step);
  auto cov = spd_inverse(info, n);
  if (cov.empty()) throw VarianceUnavailableError("observed information is not positive definite");
  const std::size_t off = alpha_interior ? 1 : 0;
  if (cfg.variance == VarianceEstimator::Sandwich) {
    const std::size_t p = K + 1;
    const auto s = model.point_scores(alpha, theta);
    std::vector<double> meat(n * n, 0.0);
    for (std::size_t i = 0; i < model.size(); ++i)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          meat[a * n + b] += s[i * p + a + 1 - off] * s[i * p + b + 1 - off];
    std::vector<double> tmp(n * n, 0.0), sandwich(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t b = 0; b < n; ++b) tmp[a * n + b] += cov[a * n + c] * meat[c * n + b];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t b = 0; b < n; ++b) sandwich[a * n + b] += tmp[a * n + c] * cov[c * n + b];
    cov = std::move(sandwich);
  }
  for (std::size_t k = 0; k < K; ++k) {
    const double v = cov[(k + off) * n + (k + off)];
    if (!(v > 0.0) || !std::isfinite(v))
      throw VarianceUnavailableError("nonpositive variance estimate");
    out.variances.push_back(v);
  }
  return out;
}

std::pair<std::size_t, RstFit> select_k(const TransformedPoints& points,
                                        std::span<const std::size_t> candidates,
                                        const RstConfig& cfg) {
  if (candidates.empty()) throw ValidationError("no candidate cluster sizes");
  std::vector<std::size_t> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::optional<std::pair<std::size_t, RstFit>> best;
  for (std::size_t K : sorted) {
    RstConfig c = cfg;
    c.K = K;
    try {
      RstFit f = fit(points, c);
      if (!best || f.aic() < best->second.aic()) best.emplace(K, std::move(f));
    } catch (const FitFailedError&) {
    } catch (const DegenerateModelError&) {
    } catch (const VarianceUnavailableError&) {
    } catch (const ValidationError&) {
    }
  }
  if (!best) throw FitFailedError("every candidate K failed to fit", 0.0, {}, -INFINITY);
  return std::move(*best);
}

}  // namespace topocmp
