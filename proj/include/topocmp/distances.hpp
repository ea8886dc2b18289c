#pragma once

#include <utility>

#include "topocmp/persistence.hpp"

namespace topocmp {

// L-infinity distance between two diagram points.
double linf_cost(const PersistencePoint& a, const PersistencePoint& b) noexcept;
// L-infinity distance from a point to the diagonal, |birth - death| / 2.
double diagonal_cost(const PersistencePoint& a) noexcept;

// Bottleneck distance: the smallest t such that the two diagrams, each
// augmented with the diagonal, admit a perfect matching with every pair cost
// <= t. Exact: t is searched over the finite set of candidate pair costs.
double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b);

// p-Wasserstein distance (sum over matched pairs of cost^p)^(1/p), L-infinity
// ground cost, diagonal augmentation. Solved as an optimal assignment on the
// (|a|+|b|) square cost matrix.
double wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b, double p = 1.0);

// The optimal matching cost before the 1/p root: wasserstein(a, b, p)^p.
// This is the quantity several TDA packages report as "the" Wasserstein
// distance, and what the simulation tables summarize.
double wasserstein_power(const PersistenceDiagram& a, const PersistenceDiagram& b,
                         double p = 2.0);

// Minimum-cost perfect assignment on an n x n row-major cost matrix
// (shortest augmenting paths with potentials, O(n^3)). Returns the column
// assigned to each row.
std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost, std::size_t n);

struct Range {
  double low = 0.0;
  double high = 0.0;
};

// (B.low / W.low, B.high / W.high).
std::pair<double, double> range_ratio(const Range& bottleneck_range,
                                      const Range& wasserstein_range);

}  // namespace topocmp
