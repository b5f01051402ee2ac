#include "nocollide/embedding.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include "nocollide/parallel.hpp"

namespace nocollide {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
  return out;
}

Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

// Flip column signs so the first coordinate of visible magnitude on each
// axis is positive, making eigen/SVD embeddings reproducible up to the
// solver's own determinism.
void canonicalize_signs(Eigen::MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (std::abs(X(i, j)) > 1e-9) {
        if (X(i, j) < 0) X.col(j) = -X.col(j);
        break;
      }
    }
  }
}

double normalized_stress(const Eigen::MatrixXd& X, const DistanceMatrix& D) {
  const std::size_t m = D.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      double dx = (X.row(i) - X.row(j)).norm();
      double delta = D(i, j);
      num += (dx - delta) * (dx - delta);
      den += delta * delta;
    }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

Embedding classical_mds(const DistanceMatrix& D, int k) {
  const std::size_t m = D.size();
  if (k < 1 || static_cast<std::size_t>(k) >= m)
    throw std::invalid_argument("classical_mds: need 1 <= k < m");
  D.validate(1e-9);

  Eigen::MatrixXd A(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) A(i, j) = D(i, j) * D(i, j);
  Eigen::VectorXd rmean = A.rowwise().mean();
  double gmean = rmean.mean();
  Eigen::MatrixXd B(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      B(i, j) = -0.5 * (A(i, j) - rmean(i) - rmean(j) + gmean);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success) throw std::runtime_error("classical_mds: eigensolver failed");

  double neg_mass = 0.0, total_mass = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    double ev = eig.eigenvalues()(i);
    total_mass += std::abs(ev);
    if (ev < 0) neg_mass += -ev;
  }

  Eigen::MatrixXd X(m, k);
  for (int c = 0; c < k; ++c) {
    // eigenvalues come in ascending order
    Eigen::Index idx = static_cast<Eigen::Index>(m) - 1 - c;
    double ev = std::max(0.0, eig.eigenvalues()(idx));
    X.col(c) = eig.eigenvectors().col(idx) * std::sqrt(ev);
  }
  canonicalize_signs(X);

  Embedding out;
  out.coords = from_eigen(X);
  out.method = "classical_mds";
  out.stress = normalized_stress(X, D);
  out.residual = total_mass > 0.0 ? neg_mass / total_mass : 0.0;
  return out;
}

Embedding smacof_mds(const DistanceMatrix& D, int k, unsigned seed, const SmacofOptions& opt) {
  const std::size_t m = D.size();
  if (k < 1) throw std::invalid_argument("smacof_mds: k must be positive");
  for (double v : D.data())
    if (!std::isfinite(v)) throw std::invalid_argument("smacof_mds: non-finite distance");
  D.validate(1e-9);

  double dscale = 0.0;
  for (double v : D.data()) dscale = std::max(dscale, v);
  if (dscale == 0.0) dscale = 1.0;

  Embedding best;
  best.stress = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    std::mt19937_64 rng(seed + static_cast<unsigned>(r) * 0x9e3779b9u);
    std::normal_distribution<double> gauss(0.0, dscale * 0.5);
    Eigen::MatrixXd X(m, k);
    for (std::size_t i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) X(i, j) = gauss(rng);

    double stress = normalized_stress(X, D);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      // Guttman transform X <- B(X) X / m with unit weights.
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
          double dx = (X.row(i) - X.row(j)).norm();
          double g = dx > 0.0 ? -D(i, j) / dx : 0.0;
          G(i, j) = g;
          G(j, i) = g;
          G(i, i) -= g;
          G(j, j) -= g;
        }
      X = (G * X) / static_cast<double>(m);
      double next = normalized_stress(X, D);
      if (std::abs(stress - next) <= opt.rel_tol * std::max(stress, 1e-300)) {
        stress = next;
        ++it;
        break;
      }
      stress = next;
    }
    if (stress < best.stress) {
      canonicalize_signs(X);
      best.coords = from_eigen(X);
      best.stress = stress;
      best.iterations = it;
    }
  }
  best.method = "smacof";
  best.seed = seed;
  return best;
}

Embedding svd_embed(const Matrix& features, int k) {
  if (features.rows == 0) throw std::invalid_argument("svd_embed: empty feature matrix");
  if (k < 1 || static_cast<std::size_t>(k) > std::min(features.rows, features.cols))
    throw std::invalid_argument("svd_embed: need 1 <= k <= min(m, d)");
  Eigen::MatrixXd F = to_eigen(features);
  F.rowwise() -= F.colwise().mean();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd X = svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal();
  canonicalize_signs(X);

  double tail = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    double s2 = svd.singularValues()(i) * svd.singularValues()(i);
    total += s2;
    if (i >= k) tail += s2;
  }

  Embedding out;
  out.coords = from_eigen(X);
  out.method = "svd";
  out.residual = total > 0.0 ? tail / total : 0.0;
  return out;
}

Embedding isomap(const DistanceMatrix& D, int k_neighbors, int k) {
  const std::size_t m = D.size();
  if (k_neighbors < 1 || static_cast<std::size_t>(k_neighbors) >= m)
    throw std::invalid_argument("isomap: need 1 <= k_neighbors < m");
  D.validate(1e-9);

  // Symmetrized k-NN graph with the input distances as edge weights.
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(m);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double da = D(i, a), db = D(i, b);
      return da != db ? da < db : a < b;
    });
    int added = 0;
    for (std::size_t j : order) {
      if (j == i) continue;
      adj[i].emplace_back(j, D(i, j));
      if (++added == k_neighbors) break;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (auto [j, w] : adj[i]) {
      bool have = false;
      for (auto [b, _] : adj[j])
        if (b == i) { have = true; break; }
      if (!have) adj[j].emplace_back(i, w);
    }

  // Connectivity check.
  {
    std::vector<int> comp(m, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < m; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (auto [w, _] : adj[v])
          if (comp[w] < 0) {
            comp[w] = ncomp;
            stack.push_back(w);
          }
      }
      ++ncomp;
    }
    if (ncomp > 1)
      throw std::runtime_error("isomap: k-NN graph disconnected into " + std::to_string(ncomp) +
                               " components");
  }

  // All-pairs shortest paths, one Dijkstra per source.
  DistanceMatrix G(m);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dist_rows(m);
  parallel_for(0, static_cast<std::int64_t>(m), [&](std::int64_t s) {
    std::vector<double> dist(m, inf);
    dist[s] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, static_cast<std::size_t>(s)});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      for (auto [w, len] : adj[v]) {
        double nd = d + len;
        if (nd < dist[w]) {
          dist[w] = nd;
          pq.push({nd, w});
        }
      }
    }
    dist_rows[s] = std::move(dist);
  });
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) G.set(i, j, 0.5 * (dist_rows[i][j] + dist_rows[j][i]));

  Embedding out = classical_mds(G, k);
  out.method = "isomap";
  return out;
}

ProcrustesResult procrustes_align(const Matrix& X, const Matrix& Y) {
  if (X.rows != Y.rows || X.cols != Y.cols)
    throw std::invalid_argument("procrustes: shape mismatch");
  if (X.rows == 0) throw std::invalid_argument("procrustes: empty input");
  Eigen::MatrixXd A = to_eigen(X), B = to_eigen(Y);
  Eigen::RowVectorXd ma = A.colwise().mean(), mb = B.colwise().mean();
  A.rowwise() -= ma;
  B.rowwise() -= mb;

  double radius2 = B.squaredNorm() / static_cast<double>(B.rows());
  if (!(radius2 > 1e-24)) throw std::invalid_argument("procrustes: degenerate reference");

  Eigen::MatrixXd H = A.transpose() * B;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // Reflections are allowed, so no determinant correction.
  Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();

  Eigen::MatrixXd aligned = A * R;
  double rms2 = (aligned - B).squaredNorm() / static_cast<double>(B.rows());
  aligned.rowwise() += mb;

  ProcrustesResult res;
  res.residual = std::sqrt(rms2 / radius2);
  res.aligned = from_eigen(aligned);
  return res;
}

DistanceMatrix rescale_to_reference(const DistanceMatrix& D, double anchor_value) {
  double mx = D.max();
  if (!(mx > 0.0)) throw std::invalid_argument("rescale: all-zero distance matrix");
  DistanceMatrix out = D;
  double f = anchor_value / mx;
  for (double& v : out.data()) v *= f;
  return out;
}

double frobenius_relative_error(const DistanceMatrix& approx, const DistanceMatrix& ref) {
  if (approx.size() != ref.size())
    throw std::invalid_argument("frobenius_relative_error: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ref.data().size(); ++k) {
    double d = approx.data()[k] - ref.data()[k];
    num += d * d;
    den += ref.data()[k] * ref.data()[k];
  }
  if (!(den > 0.0)) throw std::invalid_argument("frobenius_relative_error: zero reference");
  return std::sqrt(num / den);
}

}  // namespace nocollide
