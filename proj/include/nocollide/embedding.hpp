#pragma once

#include <string>

#include "nocollide/distance_matrix.hpp"
#include "nocollide/matrix.hpp"

namespace nocollide {

struct Embedding {
  Matrix coords;  // m points in k dimensions
  std::string method;
  double stress = 0.0;    // final normalized stress (SMACOF)
  double residual = 0.0;  // method diagnostic, see each embedding
  unsigned seed = 0;
  int iterations = 0;
};

// Classical (Torgerson) MDS: double-center the squared distances, top-k
// eigenpairs
// with negative eigenvalues clipped to zero. Signs are canonicalized so
// the first nonzero coordinate of each axis is positive; `residual`
// reports the clipped negative-eigenvalue mass as a non-Euclideanness
// diagnostic.
Embedding classical_mds(const DistanceMatrix& D, int k);

struct SmacofOptions {
  int restarts = 4;
  int max_iter = 300;
  double rel_tol = 1e-9;
};

// Metric MDS by stress majorization from seeded Gaussian starts; returns
// the lowest-stress restart. Bit-identical results for the same seed.
Embedding smacof_mds(const DistanceMatrix& D, int k, unsigned seed, const SmacofOptions& opt = {});

// Column-centered truncated SVD of a feature table; coordinates U_k S_k.
Embedding svd_embed(const Matrix& features, int k);

// k-NN graph geodesics followed by classical MDS. Throws when the graph is
// disconnected, naming the component count.
Embedding isomap(const DistanceMatrix& D, int k_neighbors, int k);

struct ProcrustesResult {
  double residual = 0.0;  // RMS misfit / RMS radius of the reference
  Matrix aligned;
};

// Optimal rigid alignment (rotation/reflection + translation, no scaling)
// of X onto Y.
ProcrustesResult procrustes_align(const Matrix& X, const Matrix& Y);

// D scaled so its largest entry equals anchor_value.
DistanceMatrix rescale_to_reference(const DistanceMatrix& D, double anchor_value);

// ||A - R||_F / ||R||_F
double frobenius_relative_error(const DistanceMatrix& approx, const DistanceMatrix& ref);

}  // namespace nocollide
