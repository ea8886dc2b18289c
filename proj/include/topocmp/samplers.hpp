#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topocmp/point_cloud.hpp"

namespace topocmp {

enum class ShapeKind { Circle, TwoDistinctCircles, TwoConcentricCircles };

// Geometry of one sampling object in the plane.
//
//  Circle:               radius radii[0], centred at the origin.
//  TwoDistinctCircles:   circle 1 (radii[0]) centred at the origin, circle 2
//                        (radii[1]) centred at (r1 + r2 + gap, 0); the closest
//                        points of the two circles are `gap` apart.
//  TwoConcentricCircles: both centred at the origin, radii[0] < radii[1].
//
// `split` is the fraction of points placed on the first circle.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Circle;
  std::vector<double> radii{1.0};
  double gap = 0.0;
  double split = 0.4;

  static ShapeSpec circle(double r);
  static ShapeSpec distinct_circles(double r1, double r2, double gap, double split = 0.4);
  static ShapeSpec concentric_circles(double r1, double r2, double split = 0.4);

  // Throws ValidationError describing the first violated invariant.
  void validate() const;

  // Number of points that go on circle 1 for a sample of size n.
  std::size_t first_count(std::size_t n) const;

  friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

// Draws n points uniformly in angle on the circle(s) of `spec`, without noise.
// Circle 1 gets floor(split * n) points, listed first. Deterministic in seed.
PointCloud sample_shape(const ShapeSpec& spec, std::size_t n, std::uint64_t seed);

// The seven two-sample designs of the simulation study, 1-based.
struct ExamplePair {
  std::string name;
  ShapeSpec first;
  ShapeSpec second;
};
ExamplePair example_pair(int number);

}  // namespace topocmp
