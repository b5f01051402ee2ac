#pragma once

#include <filesystem>
#include <string>

#include "nocollide/density.hpp"
#include "nocollide/distance_matrix.hpp"
#include "nocollide/embedding.hpp"
#include "nocollide/matrix.hpp"
#include "nocollide/slicing.hpp"
#include "nocollide/transport.hpp"

namespace nocollide {

// GridDensity: CSV of height rows x width columns (row j = 0 first) plus a
// JSON sidecar {width, height, origin, spacing} at base.json.
void write_grid_density(const GridDensity& d, const std::filesystem::path& csv_path);
GridDensity read_grid_density(const std::filesystem::path& csv_path);

// Dense CSV with a header row/column of sample indices.
void write_distance_matrix(const DistanceMatrix& D, const std::filesystem::path& path);
DistanceMatrix read_distance_matrix(const std::filesystem::path& path);

// CSV (index, x1..xk) plus JSON metadata {method, stress, seed, residual}.
void write_embedding(const Embedding& e, const std::filesystem::path& csv_path);
Matrix read_matrix_csv(const std::filesystem::path& path);        // numeric CSV with header
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path,
                      const std::string& index_label = "index");

// CSV with columns address, mass, xm_x, xm_y, xg_x, xg_y.
void write_feature_set(const FeatureSet& fs, const std::filesystem::path& path);
FeatureSet read_feature_set(const std::filesystem::path& path);

// CSV triples (i, j, mass).
void write_transport_plan(const TransportPlan& plan, const std::filesystem::path& path);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace nocollide
