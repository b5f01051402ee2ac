#include "nocollide/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nocollide/parallel.hpp"

namespace nocollide {

namespace {

// Splits one cell at the conditional median along the axis. Pixel columns
// (or rows) are scanned in coordinate order; the column holding the
// half-mass point is divided by the same fraction across all its pixels,
// which matches cutting the cell with a straight line through that column.
void split_cell(const GridDensity& d, const Cell& cell, Axis axis, Cell& left, Cell& right) {
  if (cell.pixel_fractions.size() == 1)
    throw std::runtime_error("partition depth exceeds support resolution");
  const int width = d.width;

  auto coord_of = [&](std::int32_t flat) {
    return axis == Axis::vertical ? flat % width : flat / width;
  };

  // Entries sorted by (coordinate, flat index); scanning is then a single
  // pass accumulating per-column mass.
  std::vector<std::pair<std::int32_t, double>> entries = cell.pixel_fractions;
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const auto& a, const auto& b) { return coord_of(a.first) < coord_of(b.first); });

  std::vector<double> col_mass;
  std::vector<std::size_t> col_start;
  int prev = -1;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    int c = coord_of(entries[k].first);
    if (c != prev) {
      col_start.push_back(k);
      col_mass.push_back(0.0);
      prev = c;
    }
    col_mass.back() += entries[k].second * d.mass[entries[k].first];
  }
  col_start.push_back(entries.size());

  double total = 0.0;
  for (double m : col_mass) total += m;
  if (!(total > 1e-12)) throw std::runtime_error("partition depth exceeds support resolution");
  const double half = total / 2.0;

  std::size_t split_col = 0;
  double below = 0.0;
  for (; split_col < col_mass.size(); ++split_col) {
    if (below + col_mass[split_col] >= half) break;
    below += col_mass[split_col];
  }
  if (split_col == col_mass.size()) split_col = col_mass.size() - 1;  // guards rounding
  double frac = (half - below) / col_mass[split_col];
  frac = std::clamp(frac, 0.0, 1.0);

  left.address = cell.address + '0';
  right.address = cell.address + '1';
  left.pixel_fractions.clear();
  right.pixel_fractions.clear();
  left.mass = half;
  right.mass = total - half;

  const std::size_t s0 = col_start[split_col];
  const std::size_t s1 = col_start[split_col + 1];
  for (std::size_t k = 0; k < s0; ++k) left.pixel_fractions.push_back(entries[k]);
  if (frac > 0.0)
    for (std::size_t k = s0; k < s1; ++k)
      left.pixel_fractions.emplace_back(entries[k].first, entries[k].second * frac);
  if (frac < 1.0)
    for (std::size_t k = s0; k < s1; ++k)
      right.pixel_fractions.emplace_back(entries[k].first, entries[k].second * (1.0 - frac));
  for (std::size_t k = s1; k < entries.size(); ++k) right.pixel_fractions.push_back(entries[k]);

  if (left.pixel_fractions.empty() || right.pixel_fractions.empty())
    throw std::runtime_error("partition depth exceeds support resolution");
}

}  // namespace

CellPartition partition(const GridDensity& d, const SlicingSchedule& sched) {
  if (sched.depth < 0) throw std::invalid_argument("partition: negative depth");
  Cell rootcell;
  rootcell.mass = 0.0;
  for (std::size_t k = 0; k < d.mass.size(); ++k)
    if (d.mass[k] > 0.0) {
      rootcell.pixel_fractions.emplace_back(static_cast<std::int32_t>(k), 1.0);
      rootcell.mass += d.mass[k];
    }
  if (!(rootcell.mass > 0.0)) throw std::runtime_error("partition: zero-mass density");

  std::vector<Cell> cells{std::move(rootcell)};
  for (int level = 0; level < sched.depth; ++level) {
    Axis axis = (level % 2 == 0) == (sched.first_axis == Axis::vertical) ? Axis::vertical
                                                                         : Axis::horizontal;
    std::vector<Cell> next(cells.size() * 2);
    for (std::size_t c = 0; c < cells.size(); ++c)
      split_cell(d, cells[c], axis, next[2 * c], next[2 * c + 1]);
    cells = std::move(next);
  }

  CellPartition part;
  part.width = d.width;
  part.height = d.height;
  part.depth = sched.depth;
  part.cells = std::move(cells);
  return part;
}

FeatureSet features(const GridDensity& d, const CellPartition& part) {
  if (part.width != d.width || part.height != d.height)
    throw std::invalid_argument("features: partition/density dimension mismatch");
  FeatureSet fs;
  fs.addresses.reserve(part.cells.size());
  fs.mass_centers.reserve(part.cells.size());
  fs.geom_centers.reserve(part.cells.size());
  fs.masses.reserve(part.cells.size());
  for (const Cell& cell : part.cells) {
    double wsum = 0.0, asum = 0.0;
    Vec2 wmean{0, 0}, amean{0, 0};
    for (const auto& [flat, frac] : cell.pixel_fractions) {
      int i = flat % d.width, j = flat / d.width;
      Vec2 c = d.pixel_center(i, j);
      double w = frac * d.mass[flat];
      wsum += w;
      wmean += w * c;
      asum += frac;
      amean += frac * c;
    }
    fs.addresses.push_back(cell.address);
    fs.mass_centers.push_back(wsum > 0.0 ? (1.0 / wsum) * wmean : Vec2{0, 0});
    fs.geom_centers.push_back(asum > 0.0 ? (1.0 / asum) * amean : Vec2{0, 0});
    fs.masses.push_back(cell.mass);
  }
  return fs;
}

double nc_distance(const FeatureSet& fa, const FeatureSet& fb, double p, Weighting weighting,
                   FeatureKind kind) {
  if (p < 1.0) throw std::invalid_argument("nc_distance: p must be >= 1");
  if (fa.addresses != fb.addresses)
    throw std::invalid_argument("nc_distance: feature address mismatch");
  const auto& ca = kind == FeatureKind::mass_center ? fa.mass_centers : fa.geom_centers;
  const auto& cb = kind == FeatureKind::mass_center ? fb.mass_centers : fb.geom_centers;
  double acc = 0.0;
  const double uniform_w = 1.0 / static_cast<double>(fa.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    double w = weighting == Weighting::mass ? fa.masses[k] : uniform_w;
    double dist = (ca[k] - cb[k]).norm();
    acc += p == 2.0 ? w * dist * dist : w * std::pow(dist, p);
  }
  return p == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / p);
}

std::vector<FeatureSet> extract_features(const std::vector<GridDensity>& ds,
                                         const SlicingSchedule& sched) {
  std::vector<FeatureSet> out(ds.size());
  parallel_for(0, static_cast<std::int64_t>(ds.size()), [&](std::int64_t i) {
    try {
      out[i] = features(ds[i], partition(ds[i], sched));
    } catch (const std::exception& e) {
      throw std::runtime_error("density " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

DistanceMatrix nc_distance_matrix(const std::vector<FeatureSet>& fs, double p, FeatureKind kind,
                                  Weighting weighting) {
  const std::size_t m = fs.size();
  DistanceMatrix D(m);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  parallel_for(0, static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
    auto [i, j] = pairs[k];
    D.set(i, j, nc_distance(fs[i], fs[j], p, weighting, kind));
  });
  return D;
}

DistanceMatrix nc_distance_matrix(const std::vector<GridDensity>& ds,
                                  const SlicingSchedule& sched, double p, FeatureKind kind,
                                  Weighting weighting) {
  if (ds.size() < 2) throw std::invalid_argument("nc_distance_matrix: need at least two densities");
  for (std::size_t i = 1; i < ds.size(); ++i)
    if (ds[i].width != ds[0].width || ds[i].height != ds[0].height)
      throw std::invalid_argument("nc_distance_matrix: grid dimension mismatch at density " +
                                  std::to_string(i));
  return nc_distance_matrix(extract_features(ds, sched), p, kind, weighting);
}

}  // namespace nocollide
