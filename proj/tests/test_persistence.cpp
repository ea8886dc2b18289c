#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "topocmp/distances.hpp"
#include "topocmp/error.hpp"
#include "topocmp/persistence.hpp"
#include "topocmp/samplers.hpp"

using namespace topocmp;

namespace {

ScalarGrid gaussian_bumps(std::size_t rows, std::size_t cols,
                          const std::vector<std::array<double, 3>>& bumps) {
  std::vector<double> v(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (const auto& [ci, cj, h] : bumps) {
        const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
        v[i * cols + j] = std::max(v[i * cols + j], h * std::exp(-d2 / 8.0));
      }
  return oracle::make_grid(rows, cols, std::move(v));
}

double grid_min(const ScalarGrid& g) { return *std::min_element(g.values.begin(), g.values.end()); }
double grid_max(const ScalarGrid& g) { return *std::max_element(g.values.begin(), g.values.end()); }

std::vector<PersistencePoint> sorted(std::vector<PersistencePoint> p) {
  PersistenceDiagram d;
  d.points = std::move(p);
  sort_diagram(d);
  return d.points;
}

}  // namespace

TEST_CASE("constant grid has one plateau component") {
  const auto g = oracle::make_grid(5, 6, std::vector<double>(30, 0.7));
  const auto d = h0_superlevel(g);
  REQUIRE(d.size() == 1);
  CHECK(d.points[0].birth == 0.7);
  CHECK(d.points[0].death == 0.7);
  CHECK(h0_superlevel(g, EssentialPolicy::Dropped).empty());
  CHECK(h1_superlevel(g).empty());
}

TEST_CASE("single peak gives one H0 point and no H1") {
  const auto g = gaussian_bumps(15, 12, {{7.0, 5.0, 1.0}});
  const auto d = h0_superlevel(g);
  REQUIRE(d.size() == 1);
  CHECK(d.points[0].birth == grid_max(g));
  CHECK(d.points[0].death == grid_min(g));
  CHECK(h1_superlevel(g).empty());
}

TEST_CASE("two peaks with a saddle") {
  // Two ridges of height 1.0 and 0.8 joined through a 0.3 pass, background 0.1.
  std::vector<double> v(7 * 9, 0.1);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return v[i * 9 + j]; };
  at(3, 1) = 0.9; at(3, 2) = 1.0; at(3, 3) = 0.6;
  at(3, 4) = 0.3;
  at(3, 5) = 0.5; at(3, 6) = 0.8; at(3, 7) = 0.7;
  const auto g = oracle::make_grid(7, 9, v);
  const auto d = h0_superlevel(g);
  REQUIRE(d.size() == 2);
  CHECK(d.points[0] == PersistencePoint{1.0, 0.1, HomologyRank::H0});
  CHECK(d.points[1] == PersistencePoint{0.8, 0.3, HomologyRank::H0});
  // Threshold-sweep oracle agrees.
  const auto ref = oracle::h0_sweep(oracle::make_grid(7, 9, [&] {
    auto w = v;  // distinct values required by the oracle
    for (std::size_t k = 0; k < w.size(); ++k) if (w[k] == 0.1) w[k] = 0.1 - 1e-9 * static_cast<double>(k);
    return w;
  }()));
  std::vector<PersistencePoint> big;
  for (const auto& p : ref) if (p.persistence() > 1e-6) big.push_back(p);
  REQUIRE(big.size() == 2);
  std::sort(big.begin(), big.end(), [](const auto& a, const auto& b) { return a.birth > b.birth; });
  const auto& ref2 = big;
  CHECK(ref2[0].birth == 1.0);
  CHECK(ref2[1].birth == 0.8);
  CHECK(ref2[1].death == 0.3);
}

TEST_CASE("H0 matches the threshold sweep on random grids") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_distinct_grid(rng, 8, 8);
    CHECK(h0_superlevel(g).points == sorted(oracle::h0_sweep(g)));
    CHECK(h0_by_reduction(g).points == h0_superlevel(g).points);
  }
}

TEST_CASE("H0 ties are broken by row-major index") {
  // Two equal maxima in separate components: the first in row-major order is elder.
  std::vector<double> v = {1.0, 0.0, 0.0, 1.0};
  const auto g = oracle::make_grid(1, 4, v);
  const auto d = h0_superlevel(g);
  REQUIRE(d.size() == 2);
  CHECK(d.points[0].death == 0.0);
  CHECK(h0_by_reduction(g).points == d.points);
}

TEST_CASE("H1 counts match the Euler characteristic at every threshold") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = oracle::random_distinct_grid(rng, 9, 7);
    const auto h1 = h1_superlevel(g);
    for (double u : g.values) CHECK(oracle::alive_at(h1, u) == oracle::betti1_euler(g, u));
    for (const auto& p : h1.points) CHECK(p.birth > p.death);
  }
}

TEST_CASE("annulus ridge has one loop from ridge height to the basin") {
  const std::size_t n = 41;
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = std::hypot(i - 20.0, j - 20.0);
      // Slight angular tilt so that values are distinct along the ridge.
      v[i * n + j] = std::exp(-(r - 12.0) * (r - 12.0) / 8.0) * (1.0 + 1e-3 * std::atan2(i - 20.0, j - 20.0));
    }
  const auto g = oracle::make_grid(n, n, v);
  const auto h1 = h1_superlevel(g);
  REQUIRE(h1.size() >= 1);
  const auto& top = *std::max_element(h1.points.begin(), h1.points.end(),
      [](const auto& a, const auto& b) { return a.persistence() < b.persistence(); });
  double ridge_min = INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(std::hypot(i - 20.0, j - 20.0) - 12.0) < 0.5) ridge_min = std::min(ridge_min, v[i * n + j]);
  const double basin = v[20 * n + 20];
  CHECK(top.death == doctest::Approx(basin).epsilon(1e-12));
  CHECK(top.birth > 0.9 * ridge_min);
  for (const auto& p : h1.points)
    if (&p != &top) CHECK(p.persistence() < 0.05 * top.persistence());
  for (double u : g.values) CHECK(oracle::alive_at(h1, u) == oracle::betti1_euler(g, u));
}

TEST_CASE("dense unit circle has one dominant H1 point") {
  const auto cloud = sample_shape(ShapeSpec::circle(1.0), 3000, 31);
  const auto set = diagram_pipeline(cloud, 0.1);
  double max_birth = 0.0;
  for (const auto& p : set.h1.points) max_birth = std::max(max_birth, p.birth);
  const auto big = std::count_if(set.h1.points.begin(), set.h1.points.end(),
                                 [&](const auto& p) { return p.persistence() > 0.5 * max_birth; });
  CHECK(big == 1);
}

TEST_CASE("pipeline: identical clouds give identical diagrams") {
  const auto cloud = sample_shape(ShapeSpec::circle(1.0), 300, 5);
  const auto a = diagram_pipeline(cloud, 0.1);
  const auto b = diagram_pipeline(cloud, 0.1);
  CHECK(a.h0.points == b.h0.points);
  CHECK(a.h1.points == b.h1.points);
  CHECK(bottleneck(a.h0, b.h0) == 0.0);
}

TEST_CASE("pipeline: two distinct circles give two dominant components") {
  const auto cloud = sample_shape(ShapeSpec::distinct_circles(0.5, 1.2, 1.5), 1000, 9);
  const auto d = diagram_pipeline(cloud, 0.1).h0;
  std::vector<double> pers;
  for (const auto& p : d.points) pers.push_back(p.persistence());
  std::sort(pers.begin(), pers.end());
  const double p90 = pers[static_cast<std::size_t>(0.9 * static_cast<double>(pers.size() - 1))];
  const auto above = std::count_if(pers.begin(), pers.end(), [&](double x) { return x > p90; });
  CHECK(above >= 2);
}

TEST_CASE("pipeline: unit circle has a single dominant H0 point") {
  const auto d = diagram_pipeline(sample_shape(ShapeSpec::circle(1.0), 1000, 12), 0.1).h0;
  std::vector<double> pers;
  for (const auto& p : d.points) pers.push_back(p.persistence());
  std::sort(pers.begin(), pers.end(), std::greater<>());
  REQUIRE(pers.size() >= 2);
  CHECK(pers[0] > 3 * pers[1]);
}

TEST_CASE("super-level points have birth >= death and are sorted") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_distinct_grid(rng, 12, 10);
    for (const auto& d : {h0_superlevel(g), h1_superlevel(g)}) {
      for (const auto& p : d.points) CHECK(p.birth >= p.death);
      for (std::size_t k = 1; k < d.size(); ++k)
        CHECK((d.points[k - 1].birth > d.points[k].birth ||
               (d.points[k - 1].birth == d.points[k].birth && d.points[k - 1].death >= d.points[k].death)));
    }
  }
}

TEST_CASE("stability: eps perturbation moves diagrams by at most eps") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_distinct_grid(rng, 10, 10);
    for (double eps : {1e-3, 1e-2, 5e-2}) {
      auto h = g;
      for (double& v : h.values) v += eps * u(rng);
      CHECK(bottleneck(h0_superlevel(g), h0_superlevel(h)) <= eps + 1e-12);
      CHECK(bottleneck(h1_superlevel(g), h1_superlevel(h)) <= eps + 1e-12);
    }
  }
}

TEST_CASE("non-2-D grids are unsupported") {
  ScalarGrid g;
  g.origin = {0.0, 0.0, 0.0};
  g.spacing = {1.0, 1.0, 1.0};
  g.shape = {2, 2, 2};
  g.values.assign(8, 1.0);
  CHECK_THROWS_AS(h0_superlevel(g), UnsupportedError);
  CHECK_THROWS_AS(h1_superlevel(g), UnsupportedError);
}

TEST_CASE("diagram CSV round-trip") {
  const auto set = diagram_pipeline(sample_shape(ShapeSpec::circle(1.0), 200, 2), 0.1);
  std::stringstream ss;
  write_diagrams_csv(ss, set);
  const std::string text = ss.str();
  std::istringstream a(text), b(text);
  CHECK(read_diagram_csv(a, HomologyRank::H0).points == set.h0.points);
  CHECK(read_diagram_csv(b, HomologyRank::H1).points == set.h1.points);
  std::istringstream bad("rank,birth,death\n0,1.0\n");
  CHECK_THROWS_AS(read_diagram_csv(bad), ValidationError);
}
