#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nocollide/density.hpp"
#include "nocollide/distance_matrix.hpp"

namespace nocollide {

enum class Axis { vertical, horizontal };

// Breadth-first schedule: `depth` levels of axis-aligned median cuts,
// alternating directions starting from first_axis, yielding 2^depth cells.
struct SlicingSchedule {
  int depth = 2;
  Axis first_axis = Axis::vertical;
};

// One equal-mass cell. The address records the side taken at each level
// ('0' = at or below the median, '1' = above); pixel_fractions maps flat
// pixel indices to the fraction of the pixel belonging to this cell.
struct Cell {
  std::string address;
  std::vector<std::pair<std::int32_t, double>> pixel_fractions;
  double mass = 0.0;
};

struct CellPartition {
  int width = 0;
  int height = 0;
  int depth = 0;
  std::vector<Cell> cells;  // address-lexicographic order
};

struct FeatureSet {
  std::vector<std::string> addresses;
  std::vector<Vec2> mass_centers;
  std::vector<Vec2> geom_centers;
  std::vector<double> masses;

  std::size_t size() const { return addresses.size(); }
};

enum class FeatureKind { mass_center, geom_center };
enum class Weighting { mass, uniform };

// Recursive equal-mass partition. The pixel straddling the half-mass
// point is split fractionally so both children carry exactly half of the
// cell mass; when the cumulative mass hits the target at a pixel boundary
// no pixel is split. Throws once a cell degenerates to a single pixel or
// loses effectively all mass.
CellPartition partition(const GridDensity& d, const SlicingSchedule& sched);

// Per-cell centers: mass centers weight pixel centers by fraction * mass,
// geometric centers by fraction alone.
FeatureSet features(const GridDensity& d, const CellPartition& part);

// Discrete no-collision distance between feature sets sharing an address
// list. Mass weighting uses the first argument's cell masses; uniform
// weighting scales the plain l_p feature distance by (1/2^N)^(1/p) so the
// two coincide on equal-mass partitions.
double nc_distance(const FeatureSet& fa, const FeatureSet& fb, double p,
                   Weighting weighting = Weighting::mass,
                   FeatureKind kind = FeatureKind::mass_center);

// Pairwise matrix over a density family; features are extracted once per
// density. Partition failures are rethrown with the density index.
DistanceMatrix nc_distance_matrix(const std::vector<GridDensity>& ds,
                                  const SlicingSchedule& sched, double p,
                                  FeatureKind kind, Weighting weighting = Weighting::mass);

// Feature sets for a density family, extracted in parallel.
std::vector<FeatureSet> extract_features(const std::vector<GridDensity>& ds,
                                         const SlicingSchedule& sched);
DistanceMatrix nc_distance_matrix(const std::vector<FeatureSet>& fs, double p,
                                  FeatureKind kind, Weighting weighting = Weighting::mass);

}  // namespace nocollide
