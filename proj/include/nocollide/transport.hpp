#pragma once

#include <cstdint>
#include <vector>

#include "nocollide/density.hpp"
#include "nocollide/distance_matrix.hpp"

namespace nocollide {

struct TransportPlan {
  struct Entry {
    std::int32_t i;
    std::int32_t j;
    double mass;
  };
  std::size_t source_count = 0;
  std::size_t target_count = 0;
  std::vector<Entry> entries;

  // Marginal feasibility against the given clouds.
  void validate(const PointCloud& a, const PointCloud& b, double tol = 1e-9) const;
};

struct W2Result {
  double distance = 0.0;
  TransportPlan plan;
};

// Exact 2-Wasserstein distance between weighted point clouds under the
// squared Euclidean ground cost, solved to LP optimality with a network
// simplex. Weight sums must agree within 1e-9.
W2Result exact_w2(const PointCloud& a, const PointCloud& b);

// Parameters of the rotation oracles: ellipse semi-axes (W2) or Gaussian
// standard deviations (LOT), center u.
struct RotationOracle {
  Vec2 center{0, 0};
  double a = 1.0;
  double b = 1.0;
};

// W2 between rotations by s and t of the uniform measure on an ellipse;
// depends on the angles only through t - s.
double analytic_w2_rotation(const RotationOracle& params, double s, double t);
// Same in covariance form: trace and determinant of the shape matrix.
double analytic_w2_rotation_cov(const Vec2& u, double trace, double det, double s, double t);

// Linearized W2 (standard-normal reference) between rotations of a
// Gaussian with covariance diag(a^2, b^2) and mean u.
double analytic_lot_rotation(const RotationOracle& params, double s, double t);
double analytic_lot_rotation_cov(const Vec2& u, double trace, double det, double s, double t);

double analytic_w2_translation(const Vec2& t1, const Vec2& t2);
// |c (.) t1 - c (.) t2| with c from second_moments of the base density.
double analytic_w2_dilation(const Vec2& t1, const Vec2& t2, const Vec2& c);

// Optimal maps from a common reference onto each target, resolved to maps
// by barycentric projection of the optimal plans.
struct LotEmbedding {
  PointCloud reference;
  std::vector<std::vector<Vec2>> maps;  // one image point per reference point
};

LotEmbedding lot_embed(const GridDensity& reference, const std::vector<GridDensity>& targets);

// W_{2,nu} distances between the embedded measures: L2 distances between
// maps under the reference weights.
DistanceMatrix lot_distance_matrix(const LotEmbedding& emb);

// D(0,pi)^2 - 2 D(0,pi/2)^2 over a matrix indexed by the quarter-turn
// angles {0, pi/2, pi, 3pi/2}. Zero is necessary for the four rotations to
// embed on a planar circle.
double rhombus_witness(const DistanceMatrix& quarter_turns);

}  // namespace nocollide
