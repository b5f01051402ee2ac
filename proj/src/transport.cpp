#include "nocollide/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nocollide/network_simplex.hpp"
#include "nocollide/parallel.hpp"

namespace nocollide {

void TransportPlan::validate(const PointCloud& a, const PointCloud& b, double tol) const {
  if (source_count != a.size() || target_count != b.size())
    throw std::runtime_error("transport plan: size mismatch");
  std::vector<double> row(source_count, 0.0), col(target_count, 0.0);
  for (const Entry& e : entries) {
    if (!(e.mass >= 0.0)) throw std::runtime_error("transport plan: negative mass");
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  for (std::size_t i = 0; i < source_count; ++i)
    if (std::abs(row[i] - a.weights[i]) > tol)
      throw std::runtime_error("transport plan: row marginal violated");
  for (std::size_t j = 0; j < target_count; ++j)
    if (std::abs(col[j] - b.weights[j]) > tol)
      throw std::runtime_error("transport plan: column marginal violated");
}

W2Result exact_w2(const PointCloud& a, const PointCloud& b) {
  if (a.points.empty() || b.points.empty()) throw std::invalid_argument("exact_w2: empty cloud");
  double sa = 0.0, sb = 0.0;
  for (double w : a.weights) sa += w;
  for (double w : b.weights) sb += w;
  if (std::abs(sa - sb) > 1e-9) throw std::invalid_argument("exact_w2: weight sums differ");

  // Balance the marginals bit-exactly; the residual after scaling is at
  // rounding level and goes onto the heaviest target.
  std::vector<double> bw = b.weights;
  double scale = sa / sb;
  double sb2 = 0.0;
  for (double& w : bw) {
    w *= scale;
    sb2 += w;
  }
  auto heaviest = std::max_element(bw.begin(), bw.end());
  *heaviest += sa - sb2;

  detail::TransportSimplex simplex(a.points, a.weights, b.points, bw);
  simplex.run();

  W2Result res;
  res.distance = std::sqrt(std::max(0.0, simplex.total_cost()));
  res.plan.source_count = a.size();
  res.plan.target_count = b.size();
  simplex.for_each_flow([&](std::int32_t i, std::int32_t j, double mass) {
    res.plan.entries.push_back({i, j, mass});
  });
  res.plan.validate(a, b, 1e-9);
  return res;
}

double analytic_w2_rotation_cov(const Vec2& u, double trace, double det, double s, double t) {
  if (!(trace > 0.0) || !(det > 0.0))
    throw std::invalid_argument("rotation oracle: shape matrix must be positive definite");
  double dt = t - s;
  double sinh2 = std::sin(dt / 2.0);
  double c = std::cos(dt), sn = std::sin(dt);
  double w2 = 4.0 * u.norm2() * sinh2 * sinh2 +
              0.5 * (trace - std::sqrt(trace * trace * c * c + 4.0 * det * sn * sn));
  return std::sqrt(std::max(0.0, w2));
}

double analytic_w2_rotation(const RotationOracle& params, double s, double t) {
  double a2 = params.a * params.a, b2 = params.b * params.b;
  return analytic_w2_rotation_cov(params.center, a2 + b2, a2 * b2, s, t);
}

double analytic_lot_rotation_cov(const Vec2& u, double trace, double det, double s, double t) {
  if (!(trace > 0.0) || !(det >= 0.0))
    throw std::invalid_argument("rotation oracle: covariance must be positive semidefinite");
  double dt = t - s;
  double sinh2 = std::sin(dt / 2.0);
  double sn = std::sin(dt);
  double w2 = 4.0 * u.norm2() * sinh2 * sinh2 +
              2.0 * (trace - 2.0 * std::sqrt(det)) * sn * sn;
  return std::sqrt(std::max(0.0, w2));
}

double analytic_lot_rotation(const RotationOracle& params, double s, double t) {
  double a2 = params.a * params.a, b2 = params.b * params.b;
  return analytic_lot_rotation_cov(params.center, a2 + b2, a2 * b2, s, t);
}

double analytic_w2_translation(const Vec2& t1, const Vec2& t2) { return (t1 - t2).norm(); }

double analytic_w2_dilation(const Vec2& t1, const Vec2& t2, const Vec2& c) {
  if (!(t1.x > 0.0 && t1.y > 0.0 && t2.x > 0.0 && t2.y > 0.0))
    throw std::invalid_argument("dilation oracle: parameters must be positive");
  return (c.cwise(t1) - c.cwise(t2)).norm();
}

LotEmbedding lot_embed(const GridDensity& reference, const std::vector<GridDensity>& targets) {
  if (targets.empty()) throw std::invalid_argument("lot_embed: no targets");
  LotEmbedding emb;
  emb.reference = to_pointcloud(reference, 0.0);
  for (double w : emb.reference.weights)
    if (!(w > 0.0)) throw std::runtime_error("lot_embed: zero-weight reference point");
  emb.maps.resize(targets.size());

  parallel_for(0, static_cast<std::int64_t>(targets.size()), [&](std::int64_t t) {
    PointCloud tgt = to_pointcloud(targets[t], 0.0);
    W2Result res = exact_w2(emb.reference, tgt);
    // Barycentric projection of the plan onto a map.
    std::vector<Vec2> map(emb.reference.size(), Vec2{0, 0});
    for (const TransportPlan::Entry& e : res.plan.entries) map[e.i] += e.mass * tgt.points[e.j];
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = (1.0 / emb.reference.weights[i]) * map[i];
    emb.maps[t] = std::move(map);
  });
  return emb;
}

DistanceMatrix lot_distance_matrix(const LotEmbedding& emb) {
  if (emb.maps.empty()) throw std::invalid_argument("lot_distance_matrix: empty embedding");
  const std::size_t m = emb.maps.size();
  const std::size_t npts = emb.reference.size();
  for (const auto& map : emb.maps)
    if (map.size() != npts) throw std::invalid_argument("lot_distance_matrix: map size mismatch");
  DistanceMatrix D(m);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  parallel_for(0, static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
    auto [i, j] = pairs[k];
    double acc = 0.0;
    for (std::size_t p = 0; p < npts; ++p)
      acc += emb.reference.weights[p] * (emb.maps[i][p] - emb.maps[j][p]).norm2();
    D.set(i, j, std::sqrt(acc));
  });
  return D;
}

double rhombus_witness(const DistanceMatrix& quarter_turns) {
  if (quarter_turns.size() != 4)
    throw std::invalid_argument("rhombus_witness: expected a 4x4 quarter-turn matrix");
  double d_half = quarter_turns(0, 2);  // angle pi
  double d_quarter = quarter_turns(0, 1);
  return d_half * d_half - 2.0 * d_quarter * d_quarter;
}

}  // namespace nocollide
