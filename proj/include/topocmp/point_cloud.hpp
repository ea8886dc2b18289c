#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace topocmp {

// n points in R^dim, stored contiguously (point i at coords[i*dim, (i+1)*dim)).
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t dim);
  PointCloud(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const noexcept { return coords_; }

  void push_back(std::span<const double> p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

// One row per point, comma separated, no header.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
// Reads rows of comma-separated reals. A first line that does not parse as
// numbers is treated as a header and skipped.
PointCloud read_cloud_csv(std::istream& in);
PointCloud read_cloud_csv(const std::string& path);

}  // namespace topocmp
