#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "nocollide/density.hpp"
#include "nocollide/io.hpp"
#include "nocollide/slicing.hpp"
#include "support.hpp"

using namespace nocollide;

namespace {

GridDensity uniform_grid_density(int n) {
  GridDensity d;
  d.width = d.height = n;
  d.origin = {0, 0};
  d.spacing = 1.0;
  d.mass.assign(static_cast<std::size_t>(n) * n, 1.0 / (n * n));
  return d;
}

void check_partition_invariants(const GridDensity& d, const CellPartition& part, int depth) {
  REQUIRE(part.cells.size() == (std::size_t{1} << depth));
  double expected = d.total_mass() / static_cast<double>(part.cells.size());
  std::map<std::int32_t, double> coverage;
  for (const Cell& cell : part.cells) {
    CHECK(nctest::near(cell.mass, expected, 1e-9));
    CHECK(static_cast<int>(cell.address.size()) == depth);
    double actual = 0.0;
    for (auto [flat, frac] : cell.pixel_fractions) {
      CHECK(frac > 0.0);
      CHECK(frac <= 1.0 + 1e-12);
      coverage[flat] += frac;
      actual += frac * d.mass[flat];
    }
    CHECK(nctest::near(actual, expected, 1e-9));
  }
  for (auto [flat, total] : coverage) CHECK(nctest::near(total, 1.0, 1e-9));
  // addresses are the 2^N distinct bit strings in lexicographic order
  for (std::size_t c = 1; c < part.cells.size(); ++c)
    CHECK(part.cells[c - 1].address < part.cells[c].address);
}

}  // namespace

TEST_CASE("uniform 4x4 grid splits into exact quadrants at depth 2") {
  GridDensity d = uniform_grid_density(4);
  CellPartition part = partition(d, {2, Axis::vertical});
  check_partition_invariants(d, part, 2);
  for (const Cell& cell : part.cells) {
    CHECK(cell.pixel_fractions.size() == 4);  // 2x2 block, no fractional pixels
    for (auto [flat, frac] : cell.pixel_fractions) CHECK(nctest::near(frac, 1.0, 0.0));
  }
  // address '00' is the lower-left quadrant: first cut keeps x <= median,
  // second cut keeps y <= median
  FeatureSet fs = features(d, part);
  CHECK(fs.addresses[0] == "00");
  CHECK(fs.mass_centers[0].x == doctest::Approx(1.0));
  CHECK(fs.mass_centers[0].y == doctest::Approx(1.0));
}

TEST_CASE("disk raster partitions into equal masses with conserved fractions") {
  GridDensity d = rasterize(ShapeSpec::make_disk(1.0), square_frame({{-2, -2}, {2, 2}}, 128, 0.1), 4);
  for (int depth : {0, 1, 2, 5}) {
    CellPartition part = partition(d, {depth, Axis::vertical});
    check_partition_invariants(d, part, depth);
  }
}

TEST_CASE("random densities keep the equal-mass invariant up to depth 6") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 6; ++rep) {
    GridDensity d = nctest::random_density(rng);
    int depth = 1 + static_cast<int>(rep % 6);
    CellPartition part = partition(d, {depth, Axis::vertical});
    check_partition_invariants(d, part, depth);
  }
}

TEST_CASE("digit-like ring density partitions into 16 equal-mass cells at depth 4") {
  // 28x28 annulus on the native integer frame, as a digit '0' would be
  GridDensity d;
  d.width = d.height = 28;
  d.origin = {0, 0};
  d.spacing = 1.0;
  d.mass.assign(28 * 28, 0.0);
  for (int j = 0; j < 28; ++j)
    for (int i = 0; i < 28; ++i) {
      double x = (i + 0.5 - 14.0) / 9.0, y = (j + 0.5 - 14.0) / 11.0;
      double q = x * x + y * y;
      if (q <= 1.0 && q >= 0.45) d.at(i, j) = 1.0;
    }
  d.normalize();
  CellPartition part = partition(d, {4, Axis::vertical});
  check_partition_invariants(d, part, 4);
  for (const Cell& cell : part.cells)
    CHECK(cell.mass == doctest::Approx(1.0 / 16).epsilon(1e-9));
}

TEST_CASE("partition error paths") {
  GridDensity zero;
  zero.width = zero.height = 4;
  zero.origin = {0, 0};
  zero.spacing = 1.0;
  zero.mass.assign(16, 0.0);
  CHECK_THROWS(partition(zero, {1, Axis::vertical}));

  GridDensity single;
  single = zero;
  single.at(2, 2) = 1.0;
  CHECK_THROWS_WITH_AS(partition(single, {1, Axis::vertical}),
                       doctest::Contains("exceeds support resolution"), std::runtime_error);
}

TEST_CASE("features: global centroid reproduced and dimensions checked") {
  GridDensity d = rasterize(ShapeSpec::make_disk(1.0), square_frame({{-2, -2}, {2, 2}}, 96, 0.1), 4);
  CellPartition part = partition(d, {3, Axis::vertical});
  FeatureSet fs = features(d, part);
  Vec2 global = d.mean();
  Vec2 recon{0, 0};
  for (std::size_t c = 0; c < fs.size(); ++c) recon += fs.masses[c] * fs.mass_centers[c];
  CHECK((recon - global).norm() < 1e-9);

  CellPartition single = partition(d, {0, Axis::vertical});
  FeatureSet fs0 = features(d, single);
  CHECK((fs0.mass_centers[0] - Vec2{0, 0}).norm() < d.spacing);

  GridDensity other = rasterize(ShapeSpec::make_disk(1.0), square_frame({{-2, -2}, {2, 2}}, 64, 0.1), 4);
  CHECK_THROWS(features(other, part));
}

TEST_CASE("integer-shift features translate exactly") {
  GridFrame f = square_frame({{-2, -2}, {2, 2}}, 64, 0.1);
  GridDensity d = rasterize(ShapeSpec::make_disk(0.9, {-0.4, -0.2}), f, 4);
  GridDensity shifted = shift_pixels(d, 4, 7);
  Vec2 delta{4 * f.spacing, 7 * f.spacing};
  for (int depth : {1, 3}) {
    FeatureSet a = features(d, partition(d, {depth, Axis::vertical}));
    FeatureSet b = features(shifted, partition(shifted, {depth, Axis::vertical}));
    for (std::size_t c = 0; c < a.size(); ++c) {
      CHECK((b.mass_centers[c] - a.mass_centers[c] - delta).norm() < 1e-12);
      CHECK((b.geom_centers[c] - a.geom_centers[c] - delta).norm() < 1e-12);
    }
  }
}

TEST_CASE("nc_distance basics and the exact translation isometry") {
  GridFrame f = square_frame({{-2, -2}, {2, 2}}, 64, 0.1);
  GridDensity d = rasterize(ShapeSpec::make_disk(0.8, {-0.5, -0.5}), f, 4);
  FeatureSet fa = features(d, partition(d, {2, Axis::vertical}));
  CHECK(nctest::near(nc_distance(fa, fa, 2.0), 0.0, 0.0));

  GridDensity moved = shift_pixels(d, 6, 8);
  FeatureSet fb = features(moved, partition(moved, {2, Axis::vertical}));
  double expected = f.spacing * std::sqrt(36.0 + 64.0);
  CHECK(nctest::near(nc_distance(fa, fb, 2.0), expected, 1e-9));
  // uniform weighting coincides on equal-mass partitions
  CHECK(nctest::near(nc_distance(fa, fb, 2.0, Weighting::uniform),
                     nc_distance(fa, fb, 2.0), 1e-12));
  // p = 1 also reproduces the shift norm only through the common offset
  CHECK(nctest::near(nc_distance(fa, fb, 1.0), expected, 1e-9));

  CHECK_THROWS(nc_distance(fa, fb, 0.5));
  FeatureSet wrong = fa;
  wrong.addresses.back() = "zz";
  CHECK_THROWS(nc_distance(wrong, fb, 2.0));
}

TEST_CASE("disk vs integer-translated disk at 5 pixels gives distance 5 in pixels") {
  // spacing 1 grid so |theta| = 5 exactly (3-4-5 shift)
  GridDensity d;
  d.width = d.height = 64;
  d.origin = {0, 0};
  d.spacing = 1.0;
  d.mass.assign(64 * 64, 0.0);
  GridDensity disk = rasterize(ShapeSpec::make_disk(10.0, {22, 22}), 64, 64, {0, 0}, 1.0, 4);
  GridDensity moved = shift_pixels(disk, 3, 4);
  for (int depth : {0, 1, 2, 3, 4}) {
    FeatureSet fa = features(disk, partition(disk, {depth, Axis::vertical}));
    FeatureSet fb = features(moved, partition(moved, {depth, Axis::vertical}));
    CHECK(nctest::near(nc_distance(fa, fb, 2.0), 5.0, 1e-9));
  }
}

TEST_CASE("nested schedules double the feature count and halve masses") {
  std::mt19937_64 rng(17);
  GridDensity d = nctest::random_density(rng);
  std::size_t prev_count = 0;
  double prev_mass = 0;
  for (int depth = 0; depth <= 5; ++depth) {
    FeatureSet fs = features(d, partition(d, {depth, Axis::vertical}));
    if (depth > 0) {
      CHECK(fs.size() == prev_count * 2);
      CHECK(fs.masses[0] == doctest::Approx(prev_mass / 2).epsilon(1e-9));
    }
    prev_count = fs.size();
    prev_mass = fs.masses[0];
  }
}

TEST_CASE("nc distance matrix: symmetry, zero diagonal, triangle inequality") {
  std::mt19937_64 rng(23);
  std::vector<GridDensity> ds;
  for (int i = 0; i < 4; ++i) ds.push_back(nctest::random_density(rng, 32));
  DistanceMatrix D = nc_distance_matrix(ds, {3, Axis::vertical}, 2.0, FeatureKind::mass_center);
  D.validate(1e-9);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) CHECK(D(i, j) <= D(i, k) + D(k, j) + 1e-9);

  DistanceMatrix same = nc_distance_matrix({ds[0], ds[0]}, {2, Axis::vertical}, 2.0,
                                           FeatureKind::mass_center);
  CHECK(nctest::near(same(0, 1), 0.0, 0.0));
}

TEST_CASE("distance matrix rejects mismatched grids, naming the density") {
  std::mt19937_64 rng(29);
  GridDensity a = nctest::random_density(rng, 32);
  GridDensity b = nctest::random_density(rng, 48);
  CHECK_THROWS_WITH_AS(nc_distance_matrix({a, b}, {2, Axis::vertical}, 2.0,
                                          FeatureKind::mass_center),
                       doctest::Contains("density 1"), std::invalid_argument);
}

TEST_CASE("feature set round-trips through CSV") {
  std::mt19937_64 rng(31);
  GridDensity d = nctest::random_density(rng, 32);
  FeatureSet fs = features(d, partition(d, {3, Axis::vertical}));
  auto tmp = std::filesystem::temp_directory_path() / "nc_features_test.csv";
  write_feature_set(fs, tmp);
  FeatureSet back = read_feature_set(tmp);
  REQUIRE(back.size() == fs.size());
  for (std::size_t c = 0; c < fs.size(); ++c) {
    CHECK(back.addresses[c] == fs.addresses[c]);
    CHECK(back.masses[c] == fs.masses[c]);
    CHECK(back.mass_centers[c].x == fs.mass_centers[c].x);
    CHECK(back.geom_centers[c].y == fs.geom_centers[c].y);
  }
}
