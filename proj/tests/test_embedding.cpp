#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nocollide/embedding.hpp"
#include "nocollide/transport.hpp"
#include "support.hpp"

using namespace nocollide;

namespace {

DistanceMatrix pairwise(const Matrix& pts) {
  DistanceMatrix D(pts.rows);
  for (std::size_t i = 0; i < pts.rows; ++i)
    for (std::size_t j = i + 1; j < pts.rows; ++j) {
      double acc = 0;
      for (std::size_t d = 0; d < pts.cols; ++d) {
        double v = pts(i, d) - pts(j, d);
        acc += v * v;
      }
      D.set(i, j, std::sqrt(acc));
    }
  return D;
}

Matrix random_points(std::mt19937_64& rng, std::size_t m, std::size_t k) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix pts(m, k);
  for (auto& v : pts.data) v = gauss(rng);
  return pts;
}

}  // namespace

TEST_CASE("classical MDS reconstructs planar point sets up to rigid motion") {
  Matrix square(4, 2);
  double corners[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int i = 0; i < 4; ++i) {
    square(i, 0) = corners[i][0];
    square(i, 1) = corners[i][1];
  }
  Embedding emb = classical_mds(pairwise(square), 2);
  CHECK(procrustes_align(emb.coords, square).residual < 1e-9);

  std::mt19937_64 rng(2);
  Matrix pts = random_points(rng, 12, 2);
  Embedding emb2 = classical_mds(pairwise(pts), 2);
  CHECK(procrustes_align(emb2.coords, pts).residual < 1e-9);
  CHECK(emb2.residual < 1e-9);  // planar sets are exactly Euclidean-embeddable
}

TEST_CASE("classical MDS handles the zero matrix and rejects k >= m") {
  DistanceMatrix zero(5);
  Embedding emb = classical_mds(zero, 2);
  for (double v : emb.coords.data) CHECK(nctest::near(v, 0.0, 1e-12));
  CHECK_THROWS(classical_mds(zero, 5));
}

TEST_CASE("smacof reaches near-zero stress on embeddable inputs and is deterministic") {
  std::mt19937_64 rng(7);
  Matrix pts = random_points(rng, 10, 2);
  DistanceMatrix D = pairwise(pts);
  Embedding a = smacof_mds(D, 2, 42);
  CHECK(a.stress < 1e-6);
  Embedding b = smacof_mds(D, 2, 42);
  REQUIRE(a.coords.data.size() == b.coords.data.size());
  for (std::size_t i = 0; i < a.coords.data.size(); ++i) CHECK(a.coords.data[i] == b.coords.data[i]);
  CHECK(procrustes_align(a.coords, pts).residual < 1e-4);
}

TEST_CASE("smacof stress stays bounded away from zero on the rotation matrix") {
  RotationOracle ellipse{{0, 1}, 5, 2};
  int m = 16;
  DistanceMatrix D(m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      D.set(i, j, analytic_w2_rotation(ellipse, 2 * M_PI * i / m, 2 * M_PI * j / m));
  Embedding emb = smacof_mds(D, 2, 5, {4, 300, 1e-9});
  CHECK(emb.stress > 1e-3);
}

TEST_CASE("svd embedding recovers centered low-rank features") {
  std::mt19937_64 rng(9);
  Matrix pts = random_points(rng, 15, 2);
  Embedding emb = svd_embed(pts, 2);
  CHECK(procrustes_align(emb.coords, pts).residual < 1e-9);

  Matrix constant(6, 3);
  for (auto& v : constant.data) v = 2.5;
  Embedding flat = svd_embed(constant, 2);
  for (double v : flat.coords.data) CHECK(nctest::near(v, 0.0, 1e-9));

  CHECK_THROWS(svd_embed(pts, 3));
}

TEST_CASE("isomap recovers collinear order and reduces to MDS on complete graphs") {
  Matrix line(7, 2);
  for (int i = 0; i < 7; ++i) {
    line(i, 0) = i * 0.5;
    line(i, 1) = 0.0;
  }
  DistanceMatrix D = pairwise(line);
  Embedding emb = isomap(D, 2, 1);
  // collinear order recovered up to reflection
  bool ascending = emb.coords(1, 0) > emb.coords(0, 0);
  for (int i = 1; i < 7; ++i)
    CHECK((emb.coords(i, 0) > emb.coords(i - 1, 0)) == ascending);

  std::mt19937_64 rng(11);
  Matrix pts = random_points(rng, 9, 2);
  DistanceMatrix Dp = pairwise(pts);
  Embedding full = isomap(Dp, 8, 2);
  Embedding mds = classical_mds(Dp, 2);
  CHECK(procrustes_align(full.coords, mds.coords).residual < 1e-9);
}

TEST_CASE("isomap reports the component count on disconnected graphs") {
  // two well separated pairs with k = 1 stay disconnected
  Matrix pts(4, 2);
  pts(0, 0) = 0; pts(1, 0) = 0.1; pts(2, 0) = 100; pts(3, 0) = 100.1;
  DistanceMatrix D = pairwise(pts);
  CHECK_THROWS_WITH_AS(isomap(D, 1, 1), doctest::Contains("2 components"), std::runtime_error);
}

TEST_CASE("procrustes alignment: rigid motions vanish, scale does not") {
  std::mt19937_64 rng(13);
  Matrix pts = random_points(rng, 8, 2);
  double c = std::cos(0.7), s = std::sin(0.7);
  Matrix moved(8, 2);
  for (int i = 0; i < 8; ++i) {
    moved(i, 0) = c * pts(i, 0) - s * pts(i, 1) + 3.0;
    moved(i, 1) = s * pts(i, 0) + c * pts(i, 1) - 1.0;
  }
  CHECK(procrustes_align(moved, pts).residual < 1e-9);

  Matrix doubled = pts;
  for (auto& v : doubled.data) v *= 2.0;
  CHECK(procrustes_align(doubled, pts).residual > 0.1);

  Matrix degenerate(8, 2);
  for (auto& v : degenerate.data) v = 1.0;
  CHECK_THROWS(procrustes_align(pts, degenerate));
}

TEST_CASE("rescale_to_reference scales to the anchor and preserves ratios") {
  DistanceMatrix D(3);
  D.set(0, 1, 2.0);
  D.set(0, 2, 1.0);
  D.set(1, 2, 1.5);
  DistanceMatrix R = rescale_to_reference(D, 5.0);
  CHECK(R(0, 1) == doctest::Approx(5.0));
  CHECK(R(0, 2) / R(1, 2) == doctest::Approx(D(0, 2) / D(1, 2)).epsilon(1e-12));
  DistanceMatrix same = rescale_to_reference(D, D.max());
  for (std::size_t k = 0; k < same.data().size(); ++k)
    CHECK(nctest::near(same.data()[k], D.data()[k], 1e-12));
  CHECK_THROWS(rescale_to_reference(DistanceMatrix(3), 1.0));
}

TEST_CASE("frobenius relative error") {
  DistanceMatrix D(3);
  D.set(0, 1, 2.0);
  D.set(0, 2, 1.0);
  D.set(1, 2, 1.5);
  CHECK(nctest::near(frobenius_relative_error(D, D), 0.0, 0.0));
  DistanceMatrix E = D;
  for (double& v : E.data()) v *= 1.01;
  CHECK(frobenius_relative_error(E, D) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK_THROWS(frobenius_relative_error(D, DistanceMatrix(2)));
}

TEST_CASE("smacof stress is non-increasing across iterations") {
  // run with a single restart and many iterations; re-evaluate stress on
  // intermediate iterates by truncating max_iter
  std::mt19937_64 rng(17);
  Matrix pts = random_points(rng, 8, 3);
  DistanceMatrix D = pairwise(pts);
  double prev = 1e300;
  for (int iters = 1; iters <= 40; iters += 3) {
    Embedding e = smacof_mds(D, 2, 33, {1, iters, 0.0});
    CHECK(e.stress <= prev + 1e-12);
    prev = e.stress;
  }
}
