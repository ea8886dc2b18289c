#include "topocmp/point_cloud.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "topocmp/error.hpp"
#include "csv.hpp"

namespace topocmp {

PointCloud::PointCloud(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("point cloud dimension must be positive");
}

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim == 0) throw ValidationError("point cloud dimension must be positive");
  if (coords_.size() % dim != 0)
    throw ValidationError("coordinate count is not a multiple of the dimension");
}

void PointCloud::push_back(std::span<const double> p) {
  if (p.size() != dim_) throw ValidationError("point has wrong dimension");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto p = cloud.point(i);
    for (std::size_t d = 0; d < p.size(); ++d) {
      if (d) out << ',';
      out << detail::format_double(p[d]);
    }
    out << '\n';
  }
}

PointCloud read_cloud_csv(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    auto fields = detail::split_csv_line(line);
    row.clear();
    bool ok = true;
    for (const auto& f : fields) {
      auto v = detail::parse_double(f);
      if (!v) {
        ok = false;
        break;
      }
      row.push_back(*v);
    }
    if (!ok) {
      if (line_no == 1) continue;  // header
      throw ValidationError("unparseable point at line " + std::to_string(line_no));
    }
    if (cloud.dim() == 0) cloud = PointCloud(row.size());
    cloud.push_back(row);
  }
  return cloud;
}

PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_cloud_csv(in);
}

}  // namespace topocmp
