#include "topocmp/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "topocmp/error.hpp"

namespace topocmp {

namespace {

void check_pair(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  if (a.rank != b.rank) throw ValidationError("diagrams have different homology ranks");
  for (const auto* d : {&a, &b})
    for (const auto& p : d->points)
      if (!std::isfinite(p.birth) || !std::isfinite(p.death))
        throw ValidationError("diagram point has a non-finite coordinate");
}

// Augmented problem: rows are a_0..a_{m-1} then k diagonal slots, columns are
// b_0..b_{k-1} then m diagonal slots. Any diagonal slot may take any point.
class AugmentedCosts {
 public:
  AugmentedCosts(const PersistenceDiagram& a, const PersistenceDiagram& b)
      : a_(a.points), b_(b.points) {}

  std::size_t size() const noexcept { return a_.size() + b_.size(); }

  double operator()(std::size_t row, std::size_t col) const noexcept {
    const std::size_t m = a_.size(), k = b_.size();
    if (row < m && col < k) return linf_cost(a_[row], b_[col]);
    if (row < m) return diagonal_cost(a_[row]);
    if (col < k) return diagonal_cost(b_[col]);
    return 0.0;
  }

 private:
  const std::vector<PersistencePoint>& a_;
  const std::vector<PersistencePoint>& b_;
};

// Perfect matching on the graph {(r, c) : cost(r, c) <= threshold} by
// augmenting paths (Kuhn). Returns true when every row is matched.
class ThresholdMatcher {
 public:
  explicit ThresholdMatcher(const AugmentedCosts& costs) : costs_(costs), n_(costs.size()) {}

  bool perfect(double threshold) {
    threshold_ = threshold;
    match_col_.assign(n_, kFree);
    for (std::size_t r = 0; r < n_; ++r) {
      visited_.assign(n_, 0);
      if (!augment(r)) return false;
    }
    return true;
  }

 private:
  static constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();

  bool augment(std::size_t r) {
    for (std::size_t c = 0; c < n_; ++c) {
      if (visited_[c] || costs_(r, c) > threshold_) continue;
      visited_[c] = 1;
      if (match_col_[c] == kFree || augment(match_col_[c])) {
        match_col_[c] = r;
        return true;
      }
    }
    return false;
  }

  const AugmentedCosts& costs_;
  std::size_t n_;
  double threshold_ = 0.0;
  std::vector<std::size_t> match_col_;
  std::vector<char> visited_;
};

}  // namespace

double linf_cost(const PersistencePoint& a, const PersistencePoint& b) noexcept {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double diagonal_cost(const PersistencePoint& a) noexcept {
  return std::abs(a.birth - a.death) / 2.0;
}

double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  check_pair(a, b);
  const AugmentedCosts costs(a, b);
  const std::size_t n = costs.size();
  if (n == 0) return 0.0;

  std::vector<double> candidates;
  candidates.reserve(a.size() * b.size() + n + 1);
  candidates.push_back(0.0);
  for (const auto& p : a.points)
    for (const auto& q : b.points) candidates.push_back(linf_cost(p, q));
  for (const auto& p : a.points) candidates.push_back(diagonal_cost(p));
  for (const auto& q : b.points) candidates.push_back(diagonal_cost(q));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Matching everything to the diagonal is feasible at the largest diagonal
  // cost, so the answer never exceeds the last candidate.
  ThresholdMatcher matcher(costs);
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (matcher.perfect(candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) throw ValidationError("assignment cost matrix is not square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials u (rows), v (cols); way[] stores the augmenting tree.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double wasserstein_power(const PersistenceDiagram& a, const PersistenceDiagram& b, double p) {
  check_pair(a, b);
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("wasserstein order p must be >= 1");
  const AugmentedCosts costs(a, b);
  const std::size_t n = costs.size();
  if (n == 0) return 0.0;

  std::vector<double> matrix(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) matrix[r * n + c] = std::pow(costs(r, c), p);
  const auto assignment = min_cost_assignment(matrix, n);

  // Re-sum in row order from the original costs for a reproducible total.
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += matrix[r * n + assignment[r]];
  return total;
}

double wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b, double p) {
  const double total = wasserstein_power(a, b, p);
  return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

std::pair<double, double> range_ratio(const Range& bottleneck_range,
                                      const Range& wasserstein_range) {
  if (wasserstein_range.low == 0.0 || wasserstein_range.high == 0.0)
    throw UndefinedRatioError("wasserstein range has a zero endpoint");
  return {bottleneck_range.low / wasserstein_range.low,
          bottleneck_range.high / wasserstein_range.high};
}

}  // namespace topocmp
