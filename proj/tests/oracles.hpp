#pragma once

// Independent reference implementations used only by the tests. Each one is
// the slow, obvious version of a library routine.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <vector>

#include "topocmp/kde.hpp"
#include "topocmp/persistence.hpp"
#include "topocmp/rst.hpp"

namespace oracle {

using topocmp::PersistenceDiagram;
using topocmp::PersistencePoint;
using topocmp::ScalarGrid;
using topocmp::TransformedPoint;
using topocmp::TransformedPoints;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double linf(const PersistencePoint& a, const PersistencePoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}
inline double to_diag(const PersistencePoint& a) { return std::abs(a.birth - a.death) / 2; }

// Minimum over every partial injection a -> b (unmatched points of either side
// go to the diagonal) of the max pair cost (p = inf) or the sum of cost^p.
// Returns the unrooted sum for finite p.
inline double matching_cost(const PersistenceDiagram& a, const PersistenceDiagram& b, double p) {
  const auto& A = a.points;
  const auto& B = b.points;
  std::vector<bool> used(B.size(), false);
  double best = kInf;
  auto combine = [&](double acc, double c) {
    return p == kInf ? std::max(acc, c) : acc + std::pow(c, p);
  };
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double acc) {
    if (i == A.size()) {
      for (std::size_t j = 0; j < B.size(); ++j)
        if (!used[j]) acc = combine(acc, to_diag(B[j]));
      best = std::min(best, acc);
      return;
    }
    rec(i + 1, combine(acc, to_diag(A[i])));
    for (std::size_t j = 0; j < B.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      rec(i + 1, combine(acc, linf(A[i], B[j])));
      used[j] = false;
    }
  };
  rec(0, 0.0);
  return best;
}

inline PersistenceDiagram random_diagram(std::mt19937_64& rng, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> count(0, max_points);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PersistenceDiagram d;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double birth = u(rng);
    d.points.push_back({birth, birth - u(rng) * birth});
  }
  return d;
}

// 8-connected component labels of the nodes with value >= u.
inline std::vector<int> components_above(const ScalarGrid& g, double u, int& count) {
  const std::size_t rows = g.shape[0], cols = g.shape[1];
  std::vector<int> label(rows * cols, -1);
  count = 0;
  for (std::size_t s = 0; s < rows * cols; ++s) {
    if (g.values[s] < u || label[s] >= 0) continue;
    std::queue<std::size_t> q;
    q.push(s);
    label[s] = count;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      const long i = static_cast<long>(v / cols), j = static_cast<long>(v % cols);
      for (long di = -1; di <= 1; ++di) {
        for (long dj = -1; dj <= 1; ++dj) {
          const long a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= static_cast<long>(rows) || b >= static_cast<long>(cols))
            continue;
          const std::size_t w = static_cast<std::size_t>(a) * cols + static_cast<std::size_t>(b);
          if (g.values[w] >= u && label[w] < 0) {
            label[w] = count;
            q.push(w);
          }
        }
      }
    }
    ++count;
  }
  return label;
}

// H0 of the super-level filtration by relabelling components at every
// distinct value. Grid values must be distinct. Essential class reported as
// (max, min).
inline std::vector<PersistencePoint> h0_sweep(const ScalarGrid& g) {
  std::vector<double> levels = g.values;
  std::sort(levels.begin(), levels.end(), std::greater<>());
  std::vector<PersistencePoint> out;
  std::vector<int> prev_label;
  std::vector<double> prev_birth;  // per previous component
  for (double u : levels) {
    int count = 0;
    const auto label = components_above(g, u, count);
    std::vector<double> birth(static_cast<std::size_t>(count), -kInf);
    // Each new component: the old components inside it.
    std::vector<std::vector<int>> members(static_cast<std::size_t>(count));
    if (!prev_label.empty()) {
      std::vector<int> owner(prev_birth.size(), -1);
      for (std::size_t v = 0; v < label.size(); ++v)
        if (prev_label[v] >= 0) owner[static_cast<std::size_t>(prev_label[v])] = label[v];
      for (std::size_t c = 0; c < owner.size(); ++c)
        members[static_cast<std::size_t>(owner[c])].push_back(static_cast<int>(c));
    }
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) {
        birth[c] = u;
        continue;
      }
      double eldest = -kInf;
      for (int m : members[c]) eldest = std::max(eldest, prev_birth[static_cast<std::size_t>(m)]);
      for (int m : members[c]) {
        const double b = prev_birth[static_cast<std::size_t>(m)];
        if (b != eldest && b != u) out.push_back({b, u, topocmp::HomologyRank::H0});
      }
      birth[c] = eldest;
    }
    prev_label = label;
    prev_birth = birth;
  }
  out.push_back({levels.front(), levels.back(), topocmp::HomologyRank::H0});
  return out;
}

// First Betti number of the super-level set at u of the clique complex on the
// 8-neighbour graph: b1 = b0 + b2 - chi, with chi = V - E + F and b2 the
// number of 2x2 blocks whose four nodes are all present (each block's four
// triangles bound a hollow tetrahedron).
inline long betti1_euler(const ScalarGrid& g, double u) {
  const std::size_t rows = g.shape[0], cols = g.shape[1];
  auto in = [&](std::size_t i, std::size_t j) { return g.values[i * cols + j] >= u; };
  long V = 0, E = 0, F = 0, full_blocks = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (in(i, j)) ++V;
      if (j + 1 < cols && in(i, j) && in(i, j + 1)) ++E;
      if (i + 1 < rows && in(i, j) && in(i + 1, j)) ++E;
      if (i + 1 < rows && j + 1 < cols) {
        const bool a = in(i, j), b = in(i, j + 1), c = in(i + 1, j), d = in(i + 1, j + 1);
        E += (a && d) + (b && c);
        F += (a && b && c) + (a && b && d) + (a && c && d) + (b && c && d);
        full_blocks += a && b && c && d;
      }
    }
  }
  int b0 = 0;
  components_above(g, u, b0);
  return b0 + full_blocks - (V - E + F);
}

inline long alive_at(const PersistenceDiagram& d, double u) {
  long n = 0;
  for (const auto& p : d.points) n += p.birth >= u && p.death < u;
  return n;
}

inline ScalarGrid make_grid(std::size_t rows, std::size_t cols, std::vector<double> values) {
  ScalarGrid g;
  g.origin = {0.0, 0.0};
  g.spacing = {1.0, 1.0};
  g.shape = {rows, cols};
  g.values = std::move(values);
  return g;
}

inline ScalarGrid random_distinct_grid(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> v(rows * cols);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1) / static_cast<double>(v.size());
  std::shuffle(v.begin(), v.end(), rng);
  return make_grid(rows, cols, std::move(v));
}

// Direct log pseudolikelihood with an explicit box and KDE bandwidth. Nodes
// are visited column by column, the opposite order of the library.
struct NaiveRst {
  TransformedPoints points;
  std::size_t K = 1;
  double bandwidth = 0.5;
  topocmp::Rect box;
  std::size_t nodes = 32;

  double kde(const TransformedPoint& z) const {
    double s = 0.0;
    for (const auto& x : points) {
      const double d2 = (z.x1 - x.x1) * (z.x1 - x.x1) + (z.x2 - x.x2) * (z.x2 - x.x2);
      s += std::exp(-d2 / (2 * bandwidth * bandwidth));
    }
    return s / (static_cast<double>(points.size()) * 2 * std::numbers::pi * bandwidth * bandwidth);
  }

  std::vector<std::size_t> neighbours(std::size_t i) const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return topocmp::distance(points[i], points[a]) < topocmp::distance(points[i], points[b]);
    });
    idx.resize(K);
    return idx;
  }

  double energy(const TransformedPoint& z, const std::vector<std::size_t>& nb,
                const std::vector<double>& theta) const {
    double h = 0.0;
    for (std::size_t k = 0; k < K; ++k) h += theta[k] * topocmp::distance(z, points[nb[k]]);
    return h;
  }

  double log_pl(double alpha, const std::vector<double>& theta) const {
    const double hx = (box.x1_hi - box.x1_lo) / static_cast<double>(nodes - 1);
    const double hy = (box.x2_hi - box.x2_lo) / static_cast<double>(nodes - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto nb = neighbours(i);
      double z_sum = 0.0;
      for (std::size_t b = 0; b < nodes; ++b) {
        for (std::size_t a = 0; a < nodes; ++a) {
          const TransformedPoint z{box.x1_lo + static_cast<double>(a) * hx,
                                   box.x2_lo + static_cast<double>(b) * hy};
          const double w = hx * hy * ((a == 0 || a == nodes - 1) ? 0.5 : 1.0) *
                           ((b == 0 || b == nodes - 1) ? 0.5 : 1.0);
          z_sum += w * std::pow(kde(z), alpha) * std::exp(-energy(z, nb, theta));
        }
      }
      total += alpha * std::log(kde(points[i])) - energy(points[i], nb, theta) - std::log(z_sum);
    }
    return total;
  }
};

}  // namespace oracle
