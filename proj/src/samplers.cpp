#include "topocmp/samplers.hpp"

#include <cmath>
#include <numbers>

#include "topocmp/error.hpp"
#include "topocmp/random.hpp"

namespace topocmp {

ShapeSpec ShapeSpec::circle(double r) {
  return {ShapeKind::Circle, {r}, 0.0, 0.4};
}

ShapeSpec ShapeSpec::distinct_circles(double r1, double r2, double gap, double split) {
  return {ShapeKind::TwoDistinctCircles, {r1, r2}, gap, split};
}

ShapeSpec ShapeSpec::concentric_circles(double r1, double r2, double split) {
  return {ShapeKind::TwoConcentricCircles, {r1, r2}, 0.0, split};
}

void ShapeSpec::validate() const {
  const std::size_t want = kind == ShapeKind::Circle ? 1 : 2;
  if (radii.size() != want)
    throw ValidationError(to_string(kind) + " needs " + std::to_string(want) + " radii");
  for (double r : radii)
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("radius must be positive");
  if (kind != ShapeKind::Circle && !(split > 0.0 && split < 1.0))
    throw ValidationError("split must lie in (0, 1)");
  if (kind == ShapeKind::TwoDistinctCircles && !(gap >= 0.0))
    throw ValidationError("gap must be nonnegative");
  if (kind == ShapeKind::TwoConcentricCircles && !(radii[0] < radii[1]))
    throw ValidationError("concentric circles need r1 < r2");
}

std::size_t ShapeSpec::first_count(std::size_t n) const {
  if (kind == ShapeKind::Circle) return n;
  return static_cast<std::size_t>(std::floor(split * static_cast<double>(n)));
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::TwoDistinctCircles: return "distinct";
    case ShapeKind::TwoConcentricCircles: return "concentric";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "circle") return ShapeKind::Circle;
  if (name == "distinct") return ShapeKind::TwoDistinctCircles;
  if (name == "concentric") return ShapeKind::TwoConcentricCircles;
  throw ValidationError("unknown shape kind '" + name + "'");
}

PointCloud sample_shape(const ShapeSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ValidationError("sample size must be positive");

  Xoshiro256 rng(seed);
  PointCloud cloud(2);
  cloud.reserve(n);

  auto draw = [&](double cx, double r, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      const double p[2] = {cx + r * std::cos(phi), r * std::sin(phi)};
      cloud.push_back(p);
    }
  };

  const std::size_t n1 = spec.first_count(n);
  switch (spec.kind) {
    case ShapeKind::Circle:
      draw(0.0, spec.radii[0], n);
      break;
    case ShapeKind::TwoDistinctCircles:
      draw(0.0, spec.radii[0], n1);
      draw(spec.radii[0] + spec.radii[1] + spec.gap, spec.radii[1], n - n1);
      break;
    case ShapeKind::TwoConcentricCircles:
      draw(0.0, spec.radii[0], n1);
      draw(0.0, spec.radii[1], n - n1);
      break;
  }
  return cloud;
}

ExamplePair example_pair(int number) {
  const auto one = ShapeSpec::circle(1.0);
  const auto distinct = ShapeSpec::distinct_circles(0.5, 1.2, 1.5);
  const auto concentric = ShapeSpec::concentric_circles(1.0, 2.0);
  switch (number) {
    case 1: return {"one-circle", one, one};
    case 2: return {"different-radii", one, ShapeSpec::circle(3.0)};
    case 3: return {"two-distinct-circles", distinct, distinct};
    case 4: return {"different-distinct-circles", distinct,
                    ShapeSpec::distinct_circles(1.2, 4.0, 4.5)};
    case 5: return {"two-concentric-circles", concentric, concentric};
    case 6: return {"different-concentric-circles", concentric,
                    ShapeSpec::concentric_circles(2.0, 4.0)};
    case 7: return {"distinct-vs-concentric", distinct, concentric};
    default: throw ValidationError("example number must be in 1..7");
  }
}

}  // namespace topocmp
