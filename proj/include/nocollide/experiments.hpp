#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nocollide/density.hpp"
#include "nocollide/distance_matrix.hpp"
#include "nocollide/embedding.hpp"
#include "nocollide/matrix.hpp"
#include "nocollide/slicing.hpp"

namespace nocollide {

enum class Family { translation, dilation, rotation };
enum class Method { pixel_euclidean, w2_exact, w2_analytic, lot, nc_mass, nc_geom };

std::string to_string(Family f);
std::string to_string(Method m);
Family family_from_string(const std::string& s);
Method method_from_string(const std::string& s);

struct MethodSettings {
  int nc_mass_cuts = 2;
  int nc_geom_cuts = 2;
  double p = 2.0;
  Weighting weighting = Weighting::mass;
  Axis first_axis = Axis::vertical;
  int supersample = 4;
  int lot_ref_resolution = 48;
  double lot_ref_variance = 25.0;
  int embed_dim = 2;
  SmacofOptions smacof;
};

struct ExperimentSpec {
  Family family = Family::translation;
  ShapeSpec base = ShapeSpec::make_disk(1.0);
  std::vector<Vec2> thetas;    // translation offsets or dilation factors
  std::vector<double> angles;  // rotation angles
  int n = 128;
  std::vector<Method> methods;
  MethodSettings settings;
  unsigned seed = 0;
  nlohmann::json echo;  // original spec document, replayed into the report

  std::size_t sample_count() const {
    return family == Family::rotation ? angles.size() : thetas.size();
  }
  void validate() const;
};

// Parses and validates a spec document; missing required fields are all
// reported in one schema error.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);

// Uniform translation grids / dilation grids / equispaced angle sets.
std::vector<Vec2> uniform_grid(Vec2 lo, Vec2 hi, int nx, int ny);
std::vector<double> equispaced_angles(int count);

struct FamilyData {
  std::vector<ShapeSpec> shapes;
  std::vector<GridDensity> densities;
  GridFrame frame;
  Matrix ground_truth;  // parameter grid in physical scale; empty for rotation
};

FamilyData build_family(const ExperimentSpec& spec);

struct MethodResult {
  DistanceMatrix distances;  // rescaled to the reference anchor
  Embedding embedding;
  double frobenius_error = 0.0;
  double procrustes_residual = 0.0;  // NaN when no ground truth applies
  double witness = 0.0;              // NaN outside rotation families
  double seconds = 0.0;
  std::string error;  // empty on success
};

struct ExperimentReport {
  ExperimentSpec spec;
  DistanceMatrix reference;
  double reference_seconds = 0.0;
  double anchor = 0.0;
  double reference_witness = 0.0;
  std::map<Method, MethodResult> results;
  int thread_count = 0;
};

// Runs every requested method against the family's designated reference
// (closed forms for translation/dilation, the rotation oracle otherwise).
// Method failures are recorded in the report instead of aborting the run.
ExperimentReport run_experiment(const ExperimentSpec& spec);

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

// Distance-matrix wall clock per (method, sample count): median over
// `repetitions` runs, rasterization excluded.
struct TimingRow {
  Method method;
  int size = 0;
  double median_seconds = 0.0;
};

std::vector<TimingRow> timing_sweep(Family family, const std::vector<int>& sizes,
                                    const std::vector<Method>& methods,
                                    const MethodSettings& settings, int n = 128,
                                    int repetitions = 3);

void write_timing_csv(const std::vector<TimingRow>& rows, const std::filesystem::path& path);

struct MnistSpec {
  std::string images_path;
  std::string labels_path;
  std::set<int> digits{0, 1};
  std::size_t limit = 600;
  int cuts = 4;
  int k_neighbors = 5;
  bool with_w2 = false;       // exact W2 stays off above 200 samples unless set
  bool with_lot = false;
  unsigned seed = 0;
};

struct MnistReport {
  std::size_t count = 0;
  std::vector<int> labels;
  std::map<std::string, DistanceMatrix> matrices;
  std::map<std::string, Embedding> embeddings;  // Isomap, 2-D
  std::map<std::string, double> purity;         // 2-means purity per embedding
  std::map<std::string, double> seconds;
};

MnistReport mnist_pipeline(const MnistSpec& spec);
void write_mnist_report(const MnistReport& report, const std::filesystem::path& out_dir);

// Deterministic 2-means (farthest-pair initialization, Lloyd updates).
std::vector<int> two_means_labels(const Matrix& points);
double clustering_purity(const std::vector<int>& assignment, const std::vector<int>& labels);

// Feature table for SVD embeddings: per-cell centers scaled by sqrt(cell
// mass), so row distances equal the mass-weighted no-collision distance.
Matrix nc_feature_matrix(const std::vector<FeatureSet>& fs, FeatureKind kind);

}  // namespace nocollide
