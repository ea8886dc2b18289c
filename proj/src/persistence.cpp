#include "topocmp/persistence.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "csv.hpp"
#include "topocmp/error.hpp"

namespace topocmp {

namespace {

using Index = std::uint32_t;
constexpr Index kNone = static_cast<Index>(-1);

struct Lattice {
  std::size_t rows = 0;
  std::size_t cols = 0;
  const std::vector<double>* values = nullptr;
  // order[r] is the node entering r-th; rank is its inverse.
  std::vector<Index> order;
  std::vector<Index> rank;

  double value_at_rank(Index r) const { return (*values)[order[r]]; }
};

Lattice make_lattice(const ScalarGrid& grid) {
  grid.validate();
  if (grid.dim() != 2) throw UnsupportedError("persistence is implemented for 2-D grids only");
  Lattice lat;
  lat.rows = grid.shape[0];
  lat.cols = grid.shape[1];
  lat.values = &grid.values;
  const std::size_t n = grid.values.size();
  if (n >= kNone) throw UnsupportedError("grid too large");
  lat.order.resize(n);
  std::iota(lat.order.begin(), lat.order.end(), Index{0});
  const auto& v = grid.values;
  if (grid.direction == FiltrationDirection::SuperLevel) {
    std::stable_sort(lat.order.begin(), lat.order.end(),
                     [&](Index a, Index b) { return v[a] > v[b]; });
  } else {
    std::stable_sort(lat.order.begin(), lat.order.end(),
                     [&](Index a, Index b) { return v[a] < v[b]; });
  }
  lat.rank.resize(n);
  for (Index r = 0; r < n; ++r) lat.rank[lat.order[r]] = r;
  return lat;
}

PersistenceDiagram empty_diagram(const ScalarGrid& grid, HomologyRank rank,
                                 EssentialPolicy policy) {
  PersistenceDiagram dgm;
  dgm.rank = rank;
  dgm.direction = grid.direction;
  dgm.essential_policy = policy;
  return dgm;
}

void add_essential(PersistenceDiagram& dgm, const Lattice& lat) {
  if (dgm.essential_policy != EssentialPolicy::DeathAtGridMin) return;
  const Index last = static_cast<Index>(lat.order.size() - 1);
  dgm.points.push_back({lat.value_at_rank(0), lat.value_at_rank(last), HomologyRank::H0});
}

void add_pair(PersistenceDiagram& dgm, double birth, double death) {
  if (birth != death) dgm.points.push_back({birth, death, dgm.rank});
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index find(Index x) {
    Index root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const Index next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void attach(Index child_root, Index parent_root) { parent_[child_root] = parent_root; }

 private:
  std::vector<Index> parent_;
};

// Z/2 column reduction with a pivot table. Columns hold row indices sorted
// ascending; the pivot (lowest one) is the last entry. Returns the pivot row of
// every reduced column, or kNone for columns that reduce to zero.
std::vector<Index> reduce_columns(std::vector<std::vector<Index>> columns, std::size_t n_rows) {
  std::vector<Index> owner(n_rows, kNone);
  std::vector<Index> pivots(columns.size(), kNone);
  std::vector<Index> scratch;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    auto& col = columns[j];
    while (!col.empty() && owner[col.back()] != kNone) {
      const auto& other = columns[owner[col.back()]];
      scratch.clear();
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                    std::back_inserter(scratch));
      col.swap(scratch);
    }
    if (!col.empty()) {
      owner[col.back()] = static_cast<Index>(j);
      pivots[j] = col.back();
    }
  }
  return pivots;
}

// Clique complex of the 8-neighbour graph, cells keyed by node ranks.
struct FlagComplex {
  // Edges sorted by (max rank, min rank); entries are node ranks.
  std::vector<std::array<Index, 2>> edges;  // {max, min}
  // Triangles sorted by (r0, r1, r2) with r0 > r1 > r2; boundary as edge indices.
  std::vector<std::array<Index, 3>> triangles;
  std::vector<std::array<Index, 3>> triangle_edges;
};

FlagComplex build_complex(const Lattice& lat, bool with_triangles) {
  const std::size_t rows = lat.rows, cols = lat.cols;
  auto node = [&](std::size_t i, std::size_t j) { return static_cast<Index>(i * cols + j); };

  FlagComplex cx;
  std::vector<std::array<Index, 2>> raw;  // node ranks {max, min}
  auto edge_key = [&](Index a, Index b) {
    const Index ra = lat.rank[a], rb = lat.rank[b];
    return ra > rb ? std::array<Index, 2>{ra, rb} : std::array<Index, 2>{rb, ra};
  };
  // Edge ids by type, indexed by the node at the top-left of the edge/block.
  const std::size_t n = rows * cols;
  std::vector<Index> horiz(n, kNone), vert(n, kNone), diag(n, kNone), anti(n, kNone);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Index a = node(i, j);
      if (j + 1 < cols) {
        horiz[a] = static_cast<Index>(raw.size());
        raw.push_back(edge_key(a, node(i, j + 1)));
      }
      if (i + 1 < rows) {
        vert[a] = static_cast<Index>(raw.size());
        raw.push_back(edge_key(a, node(i + 1, j)));
      }
      if (i + 1 < rows && j + 1 < cols) {
        diag[a] = static_cast<Index>(raw.size());
        raw.push_back(edge_key(a, node(i + 1, j + 1)));
        anti[a] = static_cast<Index>(raw.size());
        raw.push_back(edge_key(node(i, j + 1), node(i + 1, j)));
      }
    }
  }

  std::vector<Index> perm(raw.size());
  std::iota(perm.begin(), perm.end(), Index{0});
  std::sort(perm.begin(), perm.end(), [&](Index x, Index y) { return raw[x] < raw[y]; });
  std::vector<Index> position(raw.size());
  cx.edges.resize(raw.size());
  for (Index k = 0; k < perm.size(); ++k) {
    position[perm[k]] = k;
    cx.edges[k] = raw[perm[k]];
  }
  if (!with_triangles) return cx;

  // Block corners a b / c d. Triangles abc, abd, acd, bcd with their edges.
  std::vector<std::array<Index, 3>> tri_nodes, tri_edges;
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      const Index a = node(i, j), b = node(i, j + 1), c = node(i + 1, j), d = node(i + 1, j + 1);
      const Index ab = position[horiz[a]], cd = position[horiz[c]];
      const Index ac = position[vert[a]], bd = position[vert[b]];
      const Index ad = position[diag[a]], bc = position[anti[a]];
      auto push = [&](Index p, Index q, Index r, Index e1, Index e2, Index e3) {
        std::array<Index, 3> rk{lat.rank[p], lat.rank[q], lat.rank[r]};
        std::sort(rk.begin(), rk.end(), std::greater<>());
        std::array<Index, 3> es{e1, e2, e3};
        std::sort(es.begin(), es.end());
        tri_nodes.push_back(rk);
        tri_edges.push_back(es);
      };
      push(a, b, c, ab, ac, bc);
      push(a, b, d, ab, bd, ad);
      push(a, c, d, ac, cd, ad);
      push(b, c, d, bd, cd, bc);
    }
  }
  std::vector<Index> tperm(tri_nodes.size());
  std::iota(tperm.begin(), tperm.end(), Index{0});
  std::sort(tperm.begin(), tperm.end(),
            [&](Index x, Index y) { return tri_nodes[x] < tri_nodes[y]; });
  cx.triangles.reserve(tperm.size());
  cx.triangle_edges.reserve(tperm.size());
  for (Index t : tperm) {
    cx.triangles.push_back(tri_nodes[t]);
    cx.triangle_edges.push_back(tri_edges[t]);
  }
  return cx;
}

}  // namespace

void sort_diagram(PersistenceDiagram& dgm) {
  std::stable_sort(dgm.points.begin(), dgm.points.end(),
                   [](const PersistencePoint& a, const PersistencePoint& b) {
                     if (a.birth != b.birth) return a.birth > b.birth;
                     return a.death > b.death;
                   });
}

PersistenceDiagram h0_superlevel(const ScalarGrid& grid, EssentialPolicy policy) {
  const Lattice lat = make_lattice(grid);
  PersistenceDiagram dgm = empty_diagram(grid, HomologyRank::H0, policy);
  const auto& values = grid.values;
  const std::size_t n = values.size();

  UnionFind uf(n);
  // Birth rank of the component rooted at each root node.
  std::vector<Index> birth(n, kNone);
  std::vector<char> present(n, 0);
  const auto rows = static_cast<std::ptrdiff_t>(lat.rows);
  const auto cols = static_cast<std::ptrdiff_t>(lat.cols);

  for (Index r = 0; r < n; ++r) {
    const Index v = lat.order[r];
    present[v] = 1;
    birth[v] = r;
    const std::ptrdiff_t i = v / cols, j = v % cols;
    for (std::ptrdiff_t di = -1; di <= 1; ++di) {
      for (std::ptrdiff_t dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const std::ptrdiff_t ni = i + di, nj = j + dj;
        if (ni < 0 || nj < 0 || ni >= rows || nj >= cols) continue;
        const auto u = static_cast<Index>(ni * cols + nj);
        if (!present[u]) continue;
        const Index ru = uf.find(u), rv = uf.find(v);
        if (ru == rv) continue;
        const bool u_elder = birth[ru] < birth[rv];
        const Index elder = u_elder ? ru : rv, younger = u_elder ? rv : ru;
        add_pair(dgm, lat.value_at_rank(birth[younger]), values[v]);
        uf.attach(younger, elder);
      }
    }
  }
  add_essential(dgm, lat);
  sort_diagram(dgm);
  return dgm;
}

PersistenceDiagram h0_by_reduction(const ScalarGrid& grid, EssentialPolicy policy) {
  const Lattice lat = make_lattice(grid);
  const FlagComplex cx = build_complex(lat, false);
  std::vector<std::vector<Index>> columns;
  columns.reserve(cx.edges.size());
  for (const auto& e : cx.edges) columns.push_back({e[1], e[0]});
  const auto pivots = reduce_columns(std::move(columns), lat.order.size());

  PersistenceDiagram dgm = empty_diagram(grid, HomologyRank::H0, policy);
  for (std::size_t k = 0; k < pivots.size(); ++k) {
    if (pivots[k] == kNone) continue;
    add_pair(dgm, lat.value_at_rank(pivots[k]), lat.value_at_rank(cx.edges[k][0]));
  }
  add_essential(dgm, lat);
  sort_diagram(dgm);
  return dgm;
}

PersistenceDiagram h1_superlevel(const ScalarGrid& grid) {
  const Lattice lat = make_lattice(grid);
  const FlagComplex cx = build_complex(lat, true);
  std::vector<std::vector<Index>> columns;
  columns.reserve(cx.triangle_edges.size());
  for (const auto& t : cx.triangle_edges) columns.push_back({t[0], t[1], t[2]});
  const auto pivots = reduce_columns(std::move(columns), cx.edges.size());

  PersistenceDiagram dgm = empty_diagram(grid, HomologyRank::H1, EssentialPolicy::Dropped);
  for (std::size_t k = 0; k < pivots.size(); ++k) {
    if (pivots[k] == kNone) continue;
    add_pair(dgm, lat.value_at_rank(cx.edges[pivots[k]][0]),
             lat.value_at_rank(cx.triangles[k][0]));
  }
  sort_diagram(dgm);
  return dgm;
}

DiagramSet diagram_pipeline(const PointCloud& cloud, double bandwidth,
                            const PipelineOptions& opts) {
  if (cloud.dim() != 2) throw ValidationError("diagram pipeline needs a 2-D point cloud");
  const KdeConfig cfg{bandwidth, 2};
  const std::size_t res[2] = {opts.resolution, opts.resolution};
  const ScalarGrid grid = kde_grid(cloud, cfg, default_bounds(cloud, cfg, opts.pad_bandwidths), res);
  DiagramSet out;
  out.h0 = h0_superlevel(grid, opts.essential_policy);
  if (opts.compute_h1) {
    out.h1 = h1_superlevel(grid);
  } else {
    out.h1.rank = HomologyRank::H1;
    out.h1.essential_policy = EssentialPolicy::Dropped;
  }
  return out;
}

void write_diagram_csv(std::ostream& out, const PersistenceDiagram& dgm) {
  out << "rank,birth,death\n";
  for (const auto& p : dgm.points)
    out << static_cast<int>(p.rank) << ',' << detail::format_double(p.birth) << ','
        << detail::format_double(p.death) << '\n';
}

void write_diagrams_csv(std::ostream& out, const DiagramSet& set) {
  write_diagram_csv(out, set.h0);
  for (const auto& p : set.h1.points)
    out << static_cast<int>(p.rank) << ',' << detail::format_double(p.birth) << ','
        << detail::format_double(p.death) << '\n';
}

PersistenceDiagram read_diagram_csv(std::istream& in, HomologyRank rank) {
  PersistenceDiagram dgm;
  dgm.rank = rank;
  std::string line;
  std::size_t line_no = 0;
  bool any_sublevel = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) throw ValidationError("diagram row needs rank,birth,death at line " +
                                             std::to_string(line_no));
    const auto r = detail::parse_double(f[0]);
    const auto b = detail::parse_double(f[1]);
    const auto d = detail::parse_double(f[2]);
    if (!r || !b || !d) {
      if (line_no == 1) continue;  // header
      throw ValidationError("unparseable diagram row at line " + std::to_string(line_no));
    }
    if (static_cast<int>(*r) != static_cast<int>(rank)) continue;
    dgm.points.push_back({*b, *d, rank});
    any_sublevel = any_sublevel || *b < *d;
  }
  dgm.direction = any_sublevel ? FiltrationDirection::SubLevel : FiltrationDirection::SuperLevel;
  return dgm;
}

PersistenceDiagram read_diagram_csv(const std::string& path, HomologyRank rank) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_diagram_csv(in, rank);
}

}  // namespace topocmp
