#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nocollide/density.hpp"
#include "nocollide/io.hpp"
#include "nocollide/mnist.hpp"
#include "support.hpp"

using namespace nocollide;

namespace {
GridFrame disk_frame(int n = 128) { return square_frame({{-2, -2}, {2, 2}}, n, 0.1); }
}

TEST_CASE("rasterized unit disk is normalized and mirror symmetric") {
  GridDensity d = rasterize(ShapeSpec::make_disk(1.0), disk_frame(), 4);
  CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  d.validate();
  // frame is centered, so x <-> -x reflection maps pixel i to width-1-i
  for (int j = 0; j < d.height; ++j)
    for (int i = 0; i < d.width / 2; ++i)
      CHECK(nctest::near(d.at(i, j), d.at(d.width - 1 - i, j), 1e-12));
}

TEST_CASE("supersampling refines toward the high-resolution raster") {
  // Midpoint sampling of an indicator quantizes pixel coverage at 1/s^2,
  // so per-pixel deviations sit at the 1e-1 peak scale for s = 4 and
  // shrink with s. Bounds frozen from the supersample-64 oracle.
  GridFrame f = disk_frame();
  GridDensity d4 = rasterize(ShapeSpec::make_disk(1.0), f, 4);
  GridDensity d16 = rasterize(ShapeSpec::make_disk(1.0), f, 16);
  GridDensity d64 = rasterize(ShapeSpec::make_disk(1.0), f, 64);
  double peak = *std::max_element(d64.mass.begin(), d64.mass.end());
  double worst4 = 0, worst16 = 0;
  for (std::size_t k = 0; k < d4.mass.size(); ++k) {
    worst4 = std::max(worst4, std::abs(d4.mass[k] - d64.mass[k]));
    worst16 = std::max(worst16, std::abs(d16.mass[k] - d64.mass[k]));
  }
  CHECK(worst4 < 0.1 * peak);    // measured 8.7e-2
  CHECK(worst16 < 0.03 * peak);  // measured 2.4e-2
  CHECK(worst16 <= worst4);
}

TEST_CASE("rasterization errors") {
  CHECK_THROWS(rasterize(ShapeSpec::make_disk(0.1, {50, 50}), 32, 32, {0, 0}, 0.1, 4));
  CHECK_THROWS(rasterize(ShapeSpec::make_disk(1.0), 32, 32, {0, 0}, -1.0, 4));
  CHECK_THROWS(ShapeSpec::make_disk(-1.0));
}

TEST_CASE("rasterization is equivariant under integer-pixel shifts") {
  GridFrame f = disk_frame(64);
  ShapeSpec base = ShapeSpec::make_ellipse(0.8, 0.5, {-0.3, 0.2});
  GridDensity d0 = rasterize(base, f, 4);
  int k = 5;
  ShapeSpec moved = apply_transform(base, TransformSpec::translate({k * f.spacing, 0}));
  GridDensity d1 = rasterize(moved, f, 4);
  GridDensity shifted = shift_pixels(d0, k, 0);
  for (std::size_t p = 0; p < d0.mass.size(); ++p)
    CHECK(nctest::near(d1.mass[p], shifted.mass[p], 1e-12));
}

TEST_CASE("apply_transform matches closed-form parameter pushforwards") {
  ShapeSpec disk = ShapeSpec::make_disk(1.0);
  ShapeSpec moved = apply_transform(disk, TransformSpec::translate({1, 2}));
  CHECK(moved.center.x == doctest::Approx(1.0));
  CHECK(moved.center.y == doctest::Approx(2.0));

  ShapeSpec ell = ShapeSpec::make_ellipse(5, 2, {0, 1});
  ShapeSpec half_turn = apply_transform(ell, TransformSpec::rotate(M_PI));
  CHECK(nctest::near(half_turn.center.x, 0.0, 1e-12));
  CHECK(half_turn.center.y == doctest::Approx(-1.0));
  CHECK(half_turn.shape.m00 == doctest::Approx(25.0));
  CHECK(half_turn.shape.m11 == doctest::Approx(4.0));

  ShapeSpec quarter = apply_transform(ell, TransformSpec::rotate(M_PI / 2));
  CHECK(quarter.center.x == doctest::Approx(-1.0));
  CHECK(nctest::near(quarter.center.y, 0.0, 1e-12));
  // R_t S R_{-t} with t = pi/2 swaps the axes
  CHECK(quarter.shape.m00 == doctest::Approx(4.0));
  CHECK(quarter.shape.m11 == doctest::Approx(25.0));
  CHECK(std::abs(quarter.shape.m01) < 1e-12);

  ShapeSpec dilated = apply_transform(disk, TransformSpec::dilate({2, 3}));
  CHECK(dilated.semi_major() == doctest::Approx(3.0));
  CHECK(dilated.semi_minor() == doctest::Approx(2.0));
  CHECK_THROWS_WITH_AS(apply_transform(apply_transform(ell, TransformSpec::rotate(0.3)),
                                       TransformSpec::dilate({2, 1})),
                       doctest::Contains("unsupported composition"), std::invalid_argument);
  CHECK_THROWS(apply_transform(disk, TransformSpec::dilate({-1, 1})));
}

TEST_CASE("to_pointcloud basics") {
  GridDensity single;
  single.width = single.height = 8;
  single.origin = {0, 0};
  single.spacing = 1.0;
  single.mass.assign(64, 0.0);
  single.at(3, 3) = 1.0;
  PointCloud pc = to_pointcloud(single, 0.0);
  REQUIRE(pc.size() == 1);
  CHECK(pc.points[0].x == doctest::Approx(3.5));
  CHECK(pc.points[0].y == doctest::Approx(3.5));
  CHECK(pc.weights[0] == doctest::Approx(1.0));

  GridDensity disk = rasterize(ShapeSpec::make_disk(1.0), disk_frame(), 4);
  PointCloud cloud = to_pointcloud(disk, 0.0);
  std::size_t nonzero = 0;
  for (double v : disk.mass)
    if (v > 0) ++nonzero;
  CHECK(cloud.size() == nonzero);
  double sum = 0;
  for (double w : cloud.weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  GridDensity empty = single;
  CHECK_THROWS_WITH_AS(to_pointcloud(empty, 2.0), doctest::Contains("empty support"),
                       std::runtime_error);
}

TEST_CASE("pointcloud of a raster keeps total mass and first moment") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    std::uniform_real_distribution<double> unif(0.3, 1.2);
    ShapeSpec s = ShapeSpec::make_ellipse(unif(rng), unif(rng), {unif(rng) - 0.75, unif(rng) - 0.75});
    GridFrame f = square_frame(s.bounds(), 96, 0.1);
    GridDensity d = rasterize(s, f, 4);
    PointCloud pc = to_pointcloud(d, 0.0);
    double sum = 0;
    Vec2 mean{0, 0};
    for (std::size_t i = 0; i < pc.size(); ++i) {
      sum += pc.weights[i];
      mean += pc.weights[i] * pc.points[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((mean - s.center).norm() < f.spacing);
  }
}

TEST_CASE("random rasterizations satisfy the density invariants") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    ShapeSpec s;
    double pick = unif(rng);
    Vec2 c{unif(rng) - 0.5, unif(rng) - 0.5};
    if (pick < 0.34)
      s = ShapeSpec::make_disk(0.2 + unif(rng), c);
    else if (pick < 0.67)
      s = ShapeSpec::make_ellipse(0.2 + unif(rng), 0.2 + unif(rng), c);
    else
      s = ShapeSpec::make_gaussian(Mat2::diagonal(0.05 + 0.2 * unif(rng), 0.05 + 0.2 * unif(rng)), c);
    GridFrame f = square_frame(s.bounds(), 64, 0.1);
    rasterize(s, f, 2).validate();
  }
}

TEST_CASE("second moments of the unit disk") {
  GridDensity d = rasterize(ShapeSpec::make_disk(1.0), disk_frame(256), 4);
  Vec2 c = second_moments(d);
  CHECK(c.x == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(c.y == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("grid density round-trips through CSV") {
  GridDensity d = rasterize(ShapeSpec::make_disk(1.0), disk_frame(32), 2);
  auto tmp = std::filesystem::temp_directory_path() / "nc_density_test.csv";
  write_grid_density(d, tmp);
  GridDensity back = read_grid_density(tmp);
  CHECK(back.width == d.width);
  CHECK(back.height == d.height);
  CHECK(nctest::near(back.spacing, d.spacing, 0.0));
  for (std::size_t k = 0; k < d.mass.size(); ++k) CHECK(back.mass[k] == d.mass[k]);
}

TEST_CASE("synthetic IDX files load with filtering and limits") {
  auto dir = std::filesystem::temp_directory_path() / "nc_mnist_test";
  std::filesystem::create_directories(dir);
  auto images = dir / "images.idx";
  auto labels = dir / "labels.idx";
  nctest::write_synthetic_mnist(images, labels, 20, 99);

  auto all = load_mnist_idx(images.string(), labels.string(), {0, 1}, 1000);
  CHECK(all.size() == 40);
  for (const auto& [d, label] : all) {
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((label == 0 || label == 1));
    CHECK(d.width == 28);
  }

  CHECK(load_mnist_idx(images.string(), labels.string(), {0}, 1000).size() == 20);
  CHECK(load_mnist_idx(images.string(), labels.string(), {0, 1}, 0).empty());

  // corrupted magic must name the offending file
  auto bad = dir / "bad.idx";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "nonsense";
  }
  CHECK_THROWS_WITH_AS(load_mnist_idx(bad.string(), labels.string(), {0, 1}, 10),
                       doctest::Contains("bad.idx"), std::runtime_error);

  // image/label count mismatch
  auto other_labels = dir / "labels40.idx";
  nctest::write_synthetic_mnist(dir / "img40.idx", other_labels, 10, 5);
  CHECK_THROWS_WITH_AS(load_mnist_idx(images.string(), other_labels.string(), {0, 1}, 10),
                       doctest::Contains("count mismatch"), std::runtime_error);
}
