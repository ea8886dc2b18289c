#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "topocmp/kde.hpp"

namespace topocmp {

enum class HomologyRank { H0 = 0, H1 = 1 };

struct PersistencePoint {
  double birth = 0.0;
  double death = 0.0;
  HomologyRank rank = HomologyRank::H0;

  double persistence() const noexcept { return birth > death ? birth - death : death - birth; }
  friend bool operator==(const PersistencePoint&, const PersistencePoint&) = default;
};

// What to do with the single H0 class that never dies.
enum class EssentialPolicy {
  DeathAtGridMin,  // report it as (max, min) over the grid (max, min swapped for sub-level)
  Dropped,
};

struct PersistenceDiagram {
  HomologyRank rank = HomologyRank::H0;
  FiltrationDirection direction = FiltrationDirection::SuperLevel;
  EssentialPolicy essential_policy = EssentialPolicy::DeathAtGridMin;
  std::vector<PersistencePoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

// Orders points by (birth desc, death desc).
void sort_diagram(PersistenceDiagram& dgm);

// H0 of the super-level (or sub-level) filtration of a 2-D grid by a
// union-find sweep over nodes. Nodes are 8-connected; ties in value are broken
// by row-major index (lower index enters first and is the elder). When
// components merge the younger one dies at the merge value. Zero-persistence
// pairs are not reported.
PersistenceDiagram h0_superlevel(const ScalarGrid& grid,
                                 EssentialPolicy policy = EssentialPolicy::DeathAtGridMin);

// H1 of the same filtration by boundary-matrix reduction over Z/2 on the
// clique complex of the 8-neighbour graph (nodes, axis and diagonal edges,
// four triangles per 2x2 block). Each cell enters with its last node.
PersistenceDiagram h1_superlevel(const ScalarGrid& grid);

// H0 computed by reducing the edge boundary matrix of the same complex that
// h1_superlevel uses. Equal to h0_superlevel; kept as an independent route.
PersistenceDiagram h0_by_reduction(const ScalarGrid& grid,
                                   EssentialPolicy policy = EssentialPolicy::DeathAtGridMin);

struct DiagramSet {
  PersistenceDiagram h0;
  PersistenceDiagram h1;
};

struct PipelineOptions {
  std::size_t resolution = kDefaultGridResolution;
  double pad_bandwidths = 3.0;
  EssentialPolicy essential_policy = EssentialPolicy::DeathAtGridMin;
  bool compute_h1 = true;
};

// KDE of a 2-D cloud on the default box, then H0 and H1 of its super-level sets.
DiagramSet diagram_pipeline(const PointCloud& cloud, double bandwidth,
                            const PipelineOptions& opts = {});

// CSV with header "rank,birth,death"; rank written as 0 or 1.
void write_diagram_csv(std::ostream& out, const PersistenceDiagram& dgm);
void write_diagrams_csv(std::ostream& out, const DiagramSet& set);
// Reads every row whose rank matches `rank`. Direction is inferred from the
// points (SuperLevel unless some point has birth < death).
PersistenceDiagram read_diagram_csv(std::istream& in, HomologyRank rank = HomologyRank::H0);
PersistenceDiagram read_diagram_csv(const std::string& path,
                                    HomologyRank rank = HomologyRank::H0);

}  // namespace topocmp
