#include "topocmp/kde.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "csv.hpp"
#include "topocmp/error.hpp"

namespace topocmp {

namespace {

double normalizer(std::size_t n, double eta, std::size_t dim) {
  return 1.0 / (static_cast<double>(n) *
                std::pow(std::sqrt(2.0 * std::numbers::pi) * eta, static_cast<double>(dim)));
}

}  // namespace

void KdeConfig::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ValidationError("bandwidth must be positive");
  if (dim == 0) throw ValidationError("dimension must be positive");
}

std::size_t ScalarGrid::node_count() const noexcept {
  std::size_t n = shape.empty() ? 0 : 1;
  for (auto s : shape) n *= s;
  return n;
}

std::vector<double> ScalarGrid::node_position(std::size_t flat_index) const {
  std::vector<double> p(dim());
  for (std::size_t d = dim(); d-- > 0;) {
    const std::size_t i = flat_index % shape[d];
    flat_index /= shape[d];
    p[d] = origin[d] + static_cast<double>(i) * spacing[d];
  }
  return p;
}

void ScalarGrid::validate() const {
  if (shape.empty()) throw ValidationError("grid has no axes");
  if (origin.size() != shape.size() || spacing.size() != shape.size())
    throw ValidationError("grid origin/spacing/shape lengths differ");
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (shape[d] == 0) throw ValidationError("grid axis has zero nodes");
    if (!(spacing[d] > 0.0)) throw ValidationError("grid spacing must be positive");
  }
  if (values.size() != node_count())
    throw ValidationError("grid value count does not match its shape");
}

double kde_eval(const PointCloud& cloud, const KdeConfig& cfg, std::span<const double> p) {
  cfg.validate();
  if (cloud.empty()) throw ValidationError("kde of an empty point cloud");
  if (cloud.dim() != cfg.dim || p.size() != cfg.dim)
    throw ValidationError("kde dimension mismatch");

  const double inv2h2 = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  double sum = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto z = cloud.point(i);
    double r2 = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) {
      const double t = p[d] - z[d];
      r2 += t * t;
    }
    sum += std::exp(-r2 * inv2h2);
  }
  return sum * normalizer(cloud.size(), cfg.bandwidth, cfg.dim);
}

Box default_bounds(const PointCloud& cloud, const KdeConfig& cfg, double pad_bandwidths) {
  cfg.validate();
  if (cloud.empty()) throw ValidationError("bounds of an empty point cloud");
  Box box{std::vector<double>(cloud.dim(), INFINITY), std::vector<double>(cloud.dim(), -INFINITY)};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto z = cloud.point(i);
    for (std::size_t d = 0; d < z.size(); ++d) {
      box.lower[d] = std::min(box.lower[d], z[d]);
      box.upper[d] = std::max(box.upper[d], z[d]);
    }
  }
  const double pad = pad_bandwidths * cfg.bandwidth;
  for (std::size_t d = 0; d < box.dim(); ++d) {
    box.lower[d] -= pad;
    box.upper[d] += pad;
  }
  return box;
}

ScalarGrid kde_grid(const PointCloud& cloud, const KdeConfig& cfg, const Box& bounds,
                    std::span<const std::size_t> resolution) {
  cfg.validate();
  if (cloud.empty()) throw ValidationError("kde of an empty point cloud");
  const std::size_t dim = cfg.dim;
  if (cloud.dim() != dim || bounds.dim() != dim || bounds.upper.size() != dim ||
      resolution.size() != dim)
    throw ValidationError("kde grid dimension mismatch");

  ScalarGrid grid;
  grid.origin = bounds.lower;
  grid.shape.assign(resolution.begin(), resolution.end());
  grid.spacing.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    if (!(bounds.upper[d] > bounds.lower[d]) || !std::isfinite(bounds.upper[d] - bounds.lower[d]))
      throw ValidationError("degenerate grid bounds");
    if (resolution[d] < 2) throw ValidationError("grid resolution must be at least 2 per axis");
    grid.spacing[d] = (bounds.upper[d] - bounds.lower[d]) / static_cast<double>(resolution[d] - 1);
  }

  // The Gaussian kernel factorizes over axes: factor[d][i_d][k] holds
  // exp(-(x_d(i_d) - z_kd)^2 / 2 eta^2), so each node costs n*D multiplies.
  const std::size_t n = cloud.size();
  const double inv2h2 = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  std::vector<std::vector<double>> factor(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    factor[d].resize(grid.shape[d] * n);
    for (std::size_t i = 0; i < grid.shape[d]; ++i) {
      const double x = grid.origin[d] + static_cast<double>(i) * grid.spacing[d];
      for (std::size_t k = 0; k < n; ++k) {
        const double t = x - cloud.point(k)[d];
        factor[d][i * n + k] = std::exp(-t * t * inv2h2);
      }
    }
  }

  const double norm = normalizer(n, cfg.bandwidth, dim);
  grid.values.resize(grid.node_count());
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> partial(n);
  for (std::size_t flat = 0; flat < grid.values.size(); ++flat) {
    const double* f0 = factor[0].data() + idx[0] * n;
    std::copy(f0, f0 + n, partial.begin());
    for (std::size_t d = 1; d < dim; ++d) {
      const double* fd = factor[d].data() + idx[d] * n;
      for (std::size_t k = 0; k < n; ++k) partial[k] *= fd[k];
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += partial[k];
    grid.values[flat] = sum * norm;

    for (std::size_t d = dim; d-- > 0;) {
      if (++idx[d] < grid.shape[d]) break;
      idx[d] = 0;
    }
  }
  grid.direction = FiltrationDirection::SuperLevel;
  return grid;
}

ScalarGrid kde_grid(const PointCloud& cloud, const KdeConfig& cfg) {
  const std::vector<std::size_t> res(cfg.dim, kDefaultGridResolution);
  return kde_grid(cloud, cfg, default_bounds(cloud, cfg), res);
}

void write_grid(std::ostream& out, const ScalarGrid& grid) {
  grid.validate();
  auto row = [&](const char* key, const auto& v) {
    out << key;
    for (const auto& x : v) {
      out << ',';
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(x)>>)
        out << detail::format_double(x);
      else
        out << x;
    }
    out << '\n';
  };
  out << "dim," << grid.dim() << '\n';
  row("origin", grid.origin);
  row("spacing", grid.spacing);
  row("shape", grid.shape);
  out << "direction,"
      << (grid.direction == FiltrationDirection::SuperLevel ? "superlevel" : "sublevel") << '\n';
  out << "values\n";
  for (double v : grid.values) out << detail::format_double(v) << '\n';
}

ScalarGrid read_grid(std::istream& in) {
  ScalarGrid grid;
  std::string line;
  auto numbers = [](const std::vector<std::string>& f) {
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) {
      auto x = detail::parse_double(f[i]);
      if (!x) throw ValidationError("bad number in grid header: " + f[i]);
      v.push_back(*x);
    }
    return v;
  };
  bool in_values = false;
  while (std::getline(in, line)) {
    if (detail::is_blank(line)) continue;
    if (in_values) {
      auto v = detail::parse_double(line);
      if (!v) throw ValidationError("bad grid value: " + line);
      grid.values.push_back(*v);
      continue;
    }
    auto f = detail::split_csv_line(line);
    if (f[0] == "dim") continue;
    if (f[0] == "origin") grid.origin = numbers(f);
    else if (f[0] == "spacing") grid.spacing = numbers(f);
    else if (f[0] == "shape") {
      for (double x : numbers(f)) grid.shape.push_back(static_cast<std::size_t>(x));
    } else if (f[0] == "direction") {
      grid.direction = f.at(1) == "sublevel" ? FiltrationDirection::SubLevel
                                             : FiltrationDirection::SuperLevel;
    } else if (f[0] == "values") {
      in_values = true;
    } else {
      throw ValidationError("unknown grid header key: " + f[0]);
    }
  }
  grid.validate();
  return grid;
}

}  // namespace topocmp
