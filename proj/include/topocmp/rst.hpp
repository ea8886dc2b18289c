#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "topocmp/persistence.hpp"

namespace topocmp {

// A diagram point moved to (birth, persistence) coordinates; x2 >= 0.
struct TransformedPoint {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const TransformedPoint&, const TransformedPoint&) = default;
};

using TransformedPoints = std::vector<TransformedPoint>;

double distance(const TransformedPoint& a, const TransformedPoint& b) noexcept;

// x1 = birth, x2 = |death - birth| (birth - death for super-level diagrams,
// death - birth for sub-level ones).
TransformedPoints transform(const PersistenceDiagram& diagram);

// Indices of the k nearest other points to points[i], closest first; equal
// distances are ordered by index.
std::vector<std::size_t> nearest_neighbors(std::span<const TransformedPoint> points,
                                           std::size_t i, std::size_t k);

// Sum over all points of the Euclidean distance to their k-th nearest neighbour.
double nn_stat(std::span<const TransformedPoint> points, std::size_t k);

struct Rect {
  double x1_lo = 0.0, x1_hi = 0.0;
  double x2_lo = 0.0, x2_hi = 0.0;

  double area() const noexcept { return (x1_hi - x1_lo) * (x2_hi - x2_lo); }
};

// How fit() estimates Var(theta).
enum class VarianceEstimator {
  ObservedInformation,  // inverse negative Hessian of the log pseudolikelihood
  Sandwich,             // H^-1 J H^-1, J the summed outer products of per-point scores
};

struct RstConfig {
  std::size_t K = 3;
  double alpha_min = 0.0;
  double alpha_max = 3.0;
  // Unset: Silverman's rule on the transformed points.
  std::optional<double> diagram_kde_bandwidth;
  // Unset: bounding box of the points widened by 3 diagram-KDE bandwidths,
  // clipped to x2 >= 0.
  std::optional<Rect> integration_box;
  std::array<std::size_t, 2> quadrature_nodes{64, 64};
  std::size_t max_outer_iterations = 50;
  double tolerance = 1e-8;
  VarianceEstimator variance = VarianceEstimator::ObservedInformation;

  void validate() const;
};

// Isotropic Gaussian KDE on transformed points (same form as kde_eval, D = 2).
class DiagramKde {
 public:
  DiagramKde(TransformedPoints points, double bandwidth);

  double bandwidth() const noexcept { return bandwidth_; }
  // log of the density, computed with log-sum-exp so it stays finite far away.
  double log_eval(const TransformedPoint& z) const;
  double eval(const TransformedPoint& z) const;

 private:
  TransformedPoints points_;
  double bandwidth_;
};

// sigma * N^(-1/6) with sigma the root mean of the two axis variances.
double silverman_bandwidth(std::span<const TransformedPoint> points);

// Tensor trapezoid rule on a rectangle.
struct QuadratureRule {
  std::vector<TransformedPoint> nodes;
  std::vector<double> weights;

  static QuadratureRule trapezoid(const Rect& box, std::array<std::size_t, 2> counts);
};

// Interaction energy of z against the neighbourhood of a point x:
// sum_k theta_k |z - neighbors[k]|, where neighbors[k] is the (k+1)-th
// nearest neighbour of x. At z = x the k-th term is x's k-th nearest-neighbour
// distance, the summand of nn_stat.
double local_hamiltonian(const TransformedPoint& z, std::span<const TransformedPoint> neighbors,
                         std::span<const double> theta);

// KDE(x)^alpha exp(-H(x | neighbors)) divided by the quadrature integral of
// the same expression over the rule's box.
double conditional_density(const TransformedPoint& x, std::span<const TransformedPoint> neighbors,
                           double alpha, std::span<const double> theta, const DiagramKde& kde,
                           const QuadratureRule& rule);

// All per-diagram precomputation for repeated pseudolikelihood evaluations:
// the diagram KDE, the quadrature rule, each point's K nearest neighbours and
// the neighbour distances at every quadrature node.
class RstModel {
 public:
  RstModel(TransformedPoints points, const RstConfig& cfg);

  std::size_t K() const noexcept { return K_; }
  std::size_t size() const noexcept { return points_.size(); }
  const TransformedPoints& points() const noexcept { return points_; }
  const Rect& box() const noexcept { return box_; }
  const DiagramKde& kde() const noexcept { return kde_; }
  const QuadratureRule& rule() const noexcept { return rule_; }
  // mean distance to the k-th neighbour, k = 1..K (index k-1)
  const std::vector<double>& neighbor_scale() const noexcept { return scale_; }

  // Sum over points of log conditional_density(x | its K nearest neighbours).
  double log_pl(double alpha, std::span<const double> theta) const;

  // Exact derivatives of log_pl in (alpha, theta_1..theta_K). Each
  // conditional is an exponential family, so the gradient is
  // observed statistic minus its conditional mean and the Hessian is minus the
  // summed conditional covariances.
  std::vector<double> gradient(double alpha, std::span<const double> theta) const;
  std::vector<double> hessian(double alpha, std::span<const double> theta) const;
  // Gradient contribution of each point, N x (K + 1) row-major.
  std::vector<double> point_scores(double alpha, std::span<const double> theta) const;

 private:
  double log_partition(std::size_t i, double alpha, std::span<const double> theta) const;
  void moments(std::size_t i, double alpha, std::span<const double> theta,
               std::vector<double>& mean, std::vector<double>& second) const;

  TransformedPoints points_;
  std::size_t K_;
  DiagramKde kde_;
  Rect box_;
  QuadratureRule rule_;
  std::vector<double> log_weights_;
  std::vector<double> node_log_kde_;
  // Per point: log KDE at the point and its K neighbour distances.
  std::vector<double> point_log_kde_;
  std::vector<double> point_dist_;  // N x K
  // Per point and order k: distance from each node to that point's k-th
  // nearest neighbour, laid out N x K x Q.
  std::vector<double> node_dist_;
  std::vector<double> scale_;
  mutable std::vector<double> scratch_;
};

double log_pseudolikelihood(const TransformedPoints& points, double alpha,
                            std::span<const double> theta, const RstConfig& cfg);

struct RstFit {
  double alpha = 0.0;
  std::vector<double> theta;
  std::vector<double> variances;
  double log_pl = 0.0;
  std::size_t K = 0;
  std::size_t outer_iterations = 0;

  double aic() const noexcept { return 2.0 * static_cast<double>(K + 1) - 2.0 * log_pl; }
};

// Alternating profile maximization of the log pseudolikelihood:
//   alpha <- bisection on d/dalpha log_pl (central differences) over
//            [alpha_min, alpha_max] with theta fixed,
//   theta <- Nelder-Mead with alpha fixed, starting from the previous theta
//            (zero on the first pass),
// until the log_pl gain of an outer pass falls below cfg.tolerance. Variances
// are the theta diagonal of the inverse of the finite-difference negative
// Hessian at the optimum.
//
// Throws DegenerateModelError (collapsed diagram), FitFailedError (no
// convergence, carries best iterate), VarianceUnavailableError.
RstFit fit(const TransformedPoints& points, const RstConfig& cfg);

// Fits every candidate K and keeps the smallest AIC = 2(K+1) - 2 log_pl.
// Ties go to the smaller K. Throws FitFailedError when every fit fails.
std::pair<std::size_t, RstFit> select_k(const TransformedPoints& points,
                                        std::span<const std::size_t> candidates,
                                        const RstConfig& cfg);

}  // namespace topocmp
