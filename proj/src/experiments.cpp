#include "nocollide/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "nocollide/io.hpp"
#include "nocollide/mnist.hpp"
#include "nocollide/parallel.hpp"
#include "nocollide/transport.hpp"

namespace nocollide {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::max(1e-9, std::chrono::duration<double>(Clock::now() - t0).count());
}

const double kNaN = std::numeric_limits<double>::quiet_NaN();

DistanceMatrix pixel_euclidean_matrix(const std::vector<GridDensity>& ds) {
  const std::size_t m = ds.size();
  DistanceMatrix D(m);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  parallel_for(0, static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
    auto [i, j] = pairs[k];
    double acc = 0.0;
    for (std::size_t p = 0; p < ds[i].mass.size(); ++p) {
      double d = ds[i].mass[p] - ds[j].mass[p];
      acc += d * d;
    }
    D.set(i, j, std::sqrt(acc));
  });
  return D;
}

DistanceMatrix pairwise_w2_matrix(const std::vector<GridDensity>& ds) {
  const std::size_t m = ds.size();
  std::vector<PointCloud> clouds(m);
  parallel_for(0, static_cast<std::int64_t>(m),
               [&](std::int64_t i) { clouds[i] = to_pointcloud(ds[i], 0.0); });
  DistanceMatrix D(m);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  parallel_for(0, static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
    auto [i, j] = pairs[k];
    D.set(i, j, exact_w2(clouds[i], clouds[j]).distance);
  });
  return D;
}

GridDensity lot_reference_density(const GridFrame& frame, const MethodSettings& s) {
  ShapeSpec gauss = ShapeSpec::make_gaussian(
      Mat2::diagonal(s.lot_ref_variance, s.lot_ref_variance), {0, 0});
  double side = frame.spacing * frame.n;
  GridFrame ref_frame{frame.origin, side / s.lot_ref_resolution, s.lot_ref_resolution};
  return rasterize(gauss, ref_frame, s.supersample);
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::translation: return "translation";
    case Family::dilation: return "dilation";
    case Family::rotation: return "rotation";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::pixel_euclidean: return "pixel_euclidean";
    case Method::w2_exact: return "w2_exact";
    case Method::w2_analytic: return "w2_analytic";
    case Method::lot: return "lot";
    case Method::nc_mass: return "nc_mass";
    case Method::nc_geom: return "nc_geom";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "translation") return Family::translation;
  if (s == "dilation") return Family::dilation;
  if (s == "rotation") return Family::rotation;
  throw std::invalid_argument("unknown family '" + s + "'");
}

Method method_from_string(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), '-', '_');
  if (t == "pixel_euclidean") return Method::pixel_euclidean;
  if (t == "w2_exact") return Method::w2_exact;
  if (t == "w2_analytic") return Method::w2_analytic;
  if (t == "lot") return Method::lot;
  if (t == "nc_mass") return Method::nc_mass;
  if (t == "nc_geom") return Method::nc_geom;
  throw std::invalid_argument("unknown method '" + s + "'");
}

void ExperimentSpec::validate() const {
  if (sample_count() == 0) throw std::invalid_argument("experiment: empty parameter set");
  if (n < 16) throw std::invalid_argument("experiment: grid size must be >= 16");
  if (methods.empty()) throw std::invalid_argument("experiment: no methods requested");
  if (family == Family::dilation)
    for (const Vec2& t : thetas)
      if (!(t.x > 0.0 && t.y > 0.0))
        throw std::invalid_argument("experiment: dilation parameters must be positive");
  base.validate();
}

std::vector<Vec2> uniform_grid(Vec2 lo, Vec2 hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("uniform_grid: empty grid");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      double x = nx == 1 ? lo.x : lo.x + (hi.x - lo.x) * i / (nx - 1);
      double y = ny == 1 ? lo.y : lo.y + (hi.y - lo.y) * j / (ny - 1);
      out.push_back({x, y});
    }
  return out;
}

std::vector<double> equispaced_angles(int count) {
  if (count < 1) throw std::invalid_argument("equispaced_angles: empty set");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = 2.0 * M_PI * k / count;
  return out;
}

ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  std::vector<std::string> missing;
  auto need = [&](const char* key) {
    if (!j.contains(key)) missing.push_back(key);
    return j.contains(key);
  };

  ExperimentSpec spec;
  spec.echo = j;

  if (need("family")) spec.family = family_from_string(j.at("family").get<std::string>());
  if (need("base")) {
    const auto& b = j.at("base");
    std::string kind = b.value("kind", "disk");
    Vec2 center{0, 0};
    if (b.contains("center"))
      center = {b.at("center")[0].get<double>(), b.at("center")[1].get<double>()};
    if (kind == "disk")
      spec.base = ShapeSpec::make_disk(b.value("radius", 1.0), center);
    else if (kind == "ellipse")
      spec.base = ShapeSpec::make_ellipse(b.at("a").get<double>(), b.at("b").get<double>(), center);
    else if (kind == "gaussian") {
      const auto& cov = b.at("cov");
      spec.base = ShapeSpec::make_gaussian(
          {cov[0][0].get<double>(), cov[0][1].get<double>(), cov[1][1].get<double>()}, center);
    } else
      throw std::runtime_error("spec schema error: unknown base kind '" + kind + "'");
  }
  if (need("n")) spec.n = j.at("n").get<int>();
  if (need("methods")) {
    for (const auto& m : j.at("methods")) spec.methods.push_back(method_from_string(m.get<std::string>()));
  }

  bool is_rotation = j.contains("family") && j.at("family") == "rotation";
  if (is_rotation) {
    if (need("angles")) {
      const auto& a = j.at("angles");
      if (a.is_number_integer())
        spec.angles = equispaced_angles(a.get<int>());
      else
        for (const auto& v : a) spec.angles.push_back(v.get<double>());
    }
  } else {
    if (need("theta")) {
      const auto& t = j.at("theta");
      if (t.contains("grid")) {
        const auto& g = t.at("grid");
        spec.thetas = uniform_grid({g.at("x")[0].get<double>(), g.at("y")[0].get<double>()},
                                   {g.at("x")[1].get<double>(), g.at("y")[1].get<double>()},
                                   g.at("x")[2].get<int>(), g.at("y")[2].get<int>());
      } else if (t.contains("list")) {
        for (const auto& v : t.at("list")) spec.thetas.push_back({v[0].get<double>(), v[1].get<double>()});
      } else {
        throw std::runtime_error("spec schema error: theta needs 'grid' or 'list'");
      }
    }
  }

  if (!missing.empty()) {
    std::string msg = "spec schema error: missing fields:";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }

  spec.seed = j.value("seed", 0u);
  if (j.contains("settings")) {
    const auto& s = j.at("settings");
    auto& st = spec.settings;
    st.nc_mass_cuts = s.value("nc_mass_cuts", st.nc_mass_cuts);
    st.nc_geom_cuts = s.value("nc_geom_cuts", st.nc_geom_cuts);
    st.p = s.value("p", st.p);
    st.supersample = s.value("supersample", st.supersample);
    st.lot_ref_resolution = s.value("lot_ref_resolution", st.lot_ref_resolution);
    st.lot_ref_variance = s.value("lot_ref_variance", st.lot_ref_variance);
    st.embed_dim = s.value("embed_dim", st.embed_dim);
    st.smacof.restarts = s.value("smacof_restarts", st.smacof.restarts);
    st.smacof.max_iter = s.value("smacof_max_iter", st.smacof.max_iter);
    st.smacof.rel_tol = s.value("smacof_tol", st.smacof.rel_tol);
    if (s.contains("weighting"))
      st.weighting = s.at("weighting") == "uniform" ? Weighting::uniform : Weighting::mass;
    if (s.contains("first_axis"))
      st.first_axis = s.at("first_axis") == "horizontal" ? Axis::horizontal : Axis::vertical;
  } else {
    // family defaults matching the experiment protocols
    switch (spec.family) {
      case Family::translation: spec.settings.nc_mass_cuts = 2; spec.settings.nc_geom_cuts = 2; break;
      case Family::dilation: spec.settings.nc_mass_cuts = 3; spec.settings.nc_geom_cuts = 6; break;
      case Family::rotation: spec.settings.nc_mass_cuts = 3; spec.settings.nc_geom_cuts = 8; break;
    }
  }
  return spec;
}

FamilyData build_family(const ExperimentSpec& spec) {
  spec.validate();
  FamilyData fam;
  switch (spec.family) {
    case Family::translation:
      for (const Vec2& t : spec.thetas)
        fam.shapes.push_back(apply_transform(spec.base, TransformSpec::translate(t)));
      fam.ground_truth = Matrix(spec.thetas.size(), 2);
      for (std::size_t i = 0; i < spec.thetas.size(); ++i) {
        fam.ground_truth(i, 0) = spec.thetas[i].x;
        fam.ground_truth(i, 1) = spec.thetas[i].y;
      }
      break;
    case Family::dilation:
      for (const Vec2& t : spec.thetas)
        fam.shapes.push_back(apply_transform(spec.base, TransformSpec::dilate(t)));
      // ground truth is c (.) theta; c is filled in by run_experiment once
      // the base raster exists
      break;
    case Family::rotation:
      for (double t : spec.angles)
        fam.shapes.push_back(apply_transform(spec.base, TransformSpec::rotate(t)));
      break;
  }

  BBox box = fam.shapes.front().bounds();
  for (const auto& s : fam.shapes) box.expand(s.bounds());
  fam.frame = square_frame(box, spec.n, 0.1);

  fam.densities.resize(fam.shapes.size());
  parallel_for(0, static_cast<std::int64_t>(fam.shapes.size()), [&](std::int64_t i) {
    fam.densities[i] = rasterize(fam.shapes[i], fam.frame, spec.settings.supersample);
  });
  return fam;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  ExperimentReport report;
  report.spec = spec;
  report.thread_count = thread_budget();

  FamilyData fam = build_family(spec);
  const std::size_t m = fam.densities.size();

  // Designated reference: closed forms for translation/dilation, the
  // rotation oracle otherwise.
  auto t0 = Clock::now();
  DistanceMatrix ref(m);
  switch (spec.family) {
    case Family::translation:
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          ref.set(i, j, analytic_w2_translation(spec.thetas[i], spec.thetas[j]));
      break;
    case Family::dilation: {
      GridDensity base = rasterize(spec.base, fam.frame, spec.settings.supersample);
      Vec2 c = second_moments(base);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          ref.set(i, j, analytic_w2_dilation(spec.thetas[i], spec.thetas[j], c));
      fam.ground_truth = Matrix(m, 2);
      for (std::size_t i = 0; i < m; ++i) {
        fam.ground_truth(i, 0) = c.x * spec.thetas[i].x;
        fam.ground_truth(i, 1) = c.y * spec.thetas[i].y;
      }
      break;
    }
    case Family::rotation: {
      double trace, det;
      if (spec.base.kind == ShapeKind::gaussian) {
        trace = 4.0 * spec.base.shape.trace();
        det = 16.0 * spec.base.shape.det();
      } else {
        trace = spec.base.shape.trace();
        det = spec.base.shape.det();
      }
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          ref.set(i, j, analytic_w2_rotation_cov(spec.base.center, trace, det, spec.angles[i],
                                                 spec.angles[j]));
      break;
    }
  }
  report.reference = ref;
  report.reference_seconds = seconds_since(t0);
  report.anchor = ref.max();

  const bool quarter_turns = spec.family == Family::rotation && m % 4 == 0 && m >= 4;
  auto quarter_witness = [&](const DistanceMatrix& D) {
    DistanceMatrix q(4);
    std::size_t step = m / 4;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) q.set(a, b, D(a * step, b * step));
    return rhombus_witness(q);
  };
  report.reference_witness = quarter_turns ? quarter_witness(ref) : kNaN;

  for (Method method : spec.methods) {
    MethodResult res;
    auto start = Clock::now();
    try {
      DistanceMatrix D;
      switch (method) {
        case Method::pixel_euclidean: D = pixel_euclidean_matrix(fam.densities); break;
        case Method::w2_exact: D = pairwise_w2_matrix(fam.densities); break;
        case Method::w2_analytic: D = ref; break;
        case Method::lot: {
          GridDensity lot_ref = lot_reference_density(fam.frame, spec.settings);
          D = lot_distance_matrix(lot_embed(lot_ref, fam.densities));
          break;
        }
        case Method::nc_mass:
          D = nc_distance_matrix(fam.densities,
                                 {spec.settings.nc_mass_cuts, spec.settings.first_axis},
                                 spec.settings.p, FeatureKind::mass_center,
                                 spec.settings.weighting);
          break;
        case Method::nc_geom:
          D = nc_distance_matrix(fam.densities,
                                 {spec.settings.nc_geom_cuts, spec.settings.first_axis},
                                 spec.settings.p, FeatureKind::geom_center,
                                 spec.settings.weighting);
          break;
      }
      res.seconds = seconds_since(start);
      res.distances = rescale_to_reference(D, report.anchor);
      res.frobenius_error = frobenius_relative_error(res.distances, ref);
      res.embedding = smacof_mds(res.distances, spec.settings.embed_dim, spec.seed,
                                 spec.settings.smacof);
      res.witness = quarter_turns ? quarter_witness(res.distances) : kNaN;
      if (fam.ground_truth.rows == m && spec.settings.embed_dim == 2)
        res.procrustes_residual = procrustes_align(res.embedding.coords, fam.ground_truth).residual;
      else
        res.procrustes_residual = kNaN;
    } catch (const std::exception& e) {
      res.seconds = seconds_since(start);
      res.error = e.what();
    }
    report.results.emplace(method, std::move(res));
  }
  return report;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream spec_out(out_dir / "spec.json");
    nlohmann::json echo = report.spec.echo.is_null() ? nlohmann::json::object() : report.spec.echo;
    spec_out << echo.dump(2) << '\n';
  }
  write_distance_matrix(report.reference, out_dir / "D_reference.csv");

  nlohmann::json j;
  j["family"] = to_string(report.spec.family);
  j["n"] = report.spec.n;
  j["seed"] = report.spec.seed;
  j["samples"] = report.spec.sample_count();
  j["thread_count"] = report.thread_count;
  j["anchor"] = report.anchor;
  j["reference_seconds"] = report.reference_seconds;
  if (!std::isnan(report.reference_witness)) j["reference_witness"] = report.reference_witness;

  for (const auto& [method, res] : report.results) {
    nlohmann::json& mj = j["methods"][to_string(method)];
    mj["seconds"] = res.seconds;
    if (!res.error.empty()) {
      mj["error"] = res.error;
      continue;
    }
    mj["frobenius_error"] = res.frobenius_error;
    if (!std::isnan(res.procrustes_residual)) mj["procrustes_residual"] = res.procrustes_residual;
    if (!std::isnan(res.witness)) mj["witness"] = res.witness;
    mj["stress"] = res.embedding.stress;
    write_distance_matrix(res.distances, out_dir / ("D_" + to_string(method) + ".csv"));
    write_embedding(res.embedding, out_dir / ("E_" + to_string(method) + ".csv"));
  }
  std::ofstream out(out_dir / "report.json");
  out << j.dump(2) << '\n';
}

std::vector<TimingRow> timing_sweep(Family family, const std::vector<int>& sizes,
                                    const std::vector<Method>& methods,
                                    const MethodSettings& settings, int n, int repetitions) {
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] < sizes[i - 1]) throw std::invalid_argument("timing_sweep: sizes must ascend");

  std::vector<TimingRow> rows;
  for (int size : sizes) {
    ExperimentSpec spec;
    spec.family = family;
    spec.n = n;
    spec.settings = settings;
    spec.methods = methods;
    int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(size))));
    switch (family) {
      case Family::translation: {
        auto grid = uniform_grid({-1, -1}, {1, 1}, side, side);
        grid.resize(size);
        spec.thetas = grid;
        break;
      }
      case Family::dilation: {
        auto grid = uniform_grid({0.5, 0.5}, {2, 4}, side, side);
        grid.resize(size);
        spec.thetas = grid;
        break;
      }
      case Family::rotation:
        spec.base = ShapeSpec::make_ellipse(2, 2, {0, 1});
        spec.angles = equispaced_angles(size);
        break;
    }
    FamilyData fam = build_family(spec);

    for (Method method : methods) {
      std::vector<double> times;
      for (int rep = 0; rep < std::max(1, repetitions); ++rep) {
        auto t0 = Clock::now();
        switch (method) {
          case Method::pixel_euclidean: pixel_euclidean_matrix(fam.densities); break;
          case Method::w2_exact:
            if (fam.densities.size() >= 2) pairwise_w2_matrix(fam.densities);
            break;
          case Method::w2_analytic: break;
          case Method::lot: {
            GridDensity lot_ref = lot_reference_density(fam.frame, settings);
            lot_distance_matrix(lot_embed(lot_ref, fam.densities));
            break;
          }
          case Method::nc_mass:
            if (fam.densities.size() >= 2)
              nc_distance_matrix(fam.densities, {settings.nc_mass_cuts, settings.first_axis},
                                 settings.p, FeatureKind::mass_center, settings.weighting);
            break;
          case Method::nc_geom:
            if (fam.densities.size() >= 2)
              nc_distance_matrix(fam.densities, {settings.nc_geom_cuts, settings.first_axis},
                                 settings.p, FeatureKind::geom_center, settings.weighting);
            break;
        }
        times.push_back(seconds_since(t0));
      }
      std::sort(times.begin(), times.end());
      rows.push_back({method, size, times[times.size() / 2]});
    }
  }
  return rows;
}

void write_timing_csv(const std::vector<TimingRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("io: cannot write " + path.string());
  out << "method,size,median_seconds\n";
  for (const auto& r : rows)
    out << to_string(r.method) << ',' << r.size << ',' << format_double(r.median_seconds) << '\n';
}

Matrix nc_feature_matrix(const std::vector<FeatureSet>& fs, FeatureKind kind) {
  if (fs.empty()) throw std::invalid_argument("nc_feature_matrix: empty family");
  const std::size_t cells = fs.front().size();
  Matrix F(fs.size(), cells * 2);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs[i].size() != cells) throw std::invalid_argument("nc_feature_matrix: size mismatch");
    const auto& centers =
        kind == FeatureKind::mass_center ? fs[i].mass_centers : fs[i].geom_centers;
    for (std::size_t c = 0; c < cells; ++c) {
      double w = std::sqrt(fs[i].masses[c]);
      F(i, 2 * c) = w * centers[c].x;
      F(i, 2 * c + 1) = w * centers[c].y;
    }
  }
  return F;
}

std::vector<int> two_means_labels(const Matrix& points) {
  const std::size_t m = points.rows;
  if (m < 2) throw std::invalid_argument("two_means: need at least two points");
  const std::size_t k = points.cols;

  auto dist2 = [&](const std::vector<double>& c, std::size_t i) {
    double acc = 0.0;
    for (std::size_t d = 0; d < k; ++d) {
      double v = points(i, d) - c[d];
      acc += v * v;
    }
    return acc;
  };

  // Deterministic seeding: the point farthest from the centroid, then the
  // point farthest from it.
  std::vector<double> centroid(k, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t d = 0; d < k; ++d) centroid[d] += points(i, d) / m;
  std::size_t i0 = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < m; ++i)
    if (dist2(centroid, i) > best) { best = dist2(centroid, i); i0 = i; }
  std::vector<double> c0(k), c1(k);
  for (std::size_t d = 0; d < k; ++d) c0[d] = points(i0, d);
  best = -1.0;
  std::size_t i1 = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (dist2(c0, i) > best) { best = dist2(c0, i); i1 = i; }
  for (std::size_t d = 0; d < k; ++d) c1[d] = points(i1, d);

  std::vector<int> assign(m, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      int a = dist2(c0, i) <= dist2(c1, i) ? 0 : 1;
      if (a != assign[i]) { assign[i] = a; changed = true; }
    }
    if (!changed && iter > 0) break;
    std::vector<double> n0(k, 0.0), n1(k, 0.0);
    std::size_t m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < m; ++i) {
      auto& acc = assign[i] == 0 ? n0 : n1;
      (assign[i] == 0 ? m0 : m1)++;
      for (std::size_t d = 0; d < k; ++d) acc[d] += points(i, d);
    }
    if (m0 == 0 || m1 == 0) break;
    for (std::size_t d = 0; d < k; ++d) {
      c0[d] = n0[d] / m0;
      c1[d] = n1[d] / m1;
    }
  }
  return assign;
}

double clustering_purity(const std::vector<int>& assignment, const std::vector<int>& labels) {
  if (assignment.size() != labels.size() || assignment.empty())
    throw std::invalid_argument("purity: size mismatch");
  double correct = 0.0;
  for (int cluster : {0, 1}) {
    std::map<int, int> counts;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == cluster) counts[labels[i]]++;
    int best = 0;
    for (const auto& [_, c] : counts) best = std::max(best, c);
    correct += best;
  }
  return correct / static_cast<double>(assignment.size());
}

MnistReport mnist_pipeline(const MnistSpec& spec) {
  auto data = load_mnist_idx(spec.images_path, spec.labels_path, spec.digits, spec.limit);
  if (data.empty()) throw std::runtime_error("mnist pipeline: no digits loaded");

  MnistReport report;
  report.count = data.size();
  std::vector<GridDensity> densities;
  densities.reserve(data.size());
  for (auto& [d, label] : data) {
    densities.push_back(std::move(d));
    report.labels.push_back(label);
  }

  auto record = [&](const std::string& name, DistanceMatrix D, double secs) {
    report.seconds[name] = secs;
    Embedding emb = isomap(D, spec.k_neighbors, 2);
    report.purity[name] = clustering_purity(two_means_labels(emb.coords), report.labels);
    report.matrices.emplace(name, std::move(D));
    report.embeddings.emplace(name, std::move(emb));
  };

  {
    auto t0 = Clock::now();
    DistanceMatrix D = nc_distance_matrix(densities, {spec.cuts, Axis::vertical}, 2.0,
                                          FeatureKind::mass_center, Weighting::mass);
    record("nc_mass", std::move(D), seconds_since(t0));
  }
  {
    auto t0 = Clock::now();
    DistanceMatrix D = pixel_euclidean_matrix(densities);
    record("pixel_euclidean", std::move(D), seconds_since(t0));
  }
  if (spec.with_lot) {
    auto t0 = Clock::now();
    // Reference: Gaussian at the frame center, covariance 25I.
    const GridDensity& d0 = densities.front();
    ShapeSpec gauss = ShapeSpec::make_gaussian(
        Mat2::diagonal(25.0, 25.0),
        {d0.origin.x + 0.5 * d0.width * d0.spacing, d0.origin.y + 0.5 * d0.height * d0.spacing});
    GridDensity lot_ref = rasterize(gauss, d0.width, d0.height, d0.origin, d0.spacing, 4);
    DistanceMatrix D = lot_distance_matrix(lot_embed(lot_ref, densities));
    record("lot", std::move(D), seconds_since(t0));
  }
  // Exact W2 stays off above 200 samples unless explicitly requested.
  if (spec.with_w2 || densities.size() <= 200) {
    auto t0 = Clock::now();
    DistanceMatrix D = pairwise_w2_matrix(densities);
    record("w2_exact", std::move(D), seconds_since(t0));
  }
  return report;
}

void write_mnist_report(const MnistReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json j;
  j["count"] = report.count;
  for (const auto& [name, D] : report.matrices)
    write_distance_matrix(D, out_dir / ("D_" + name + ".csv"));
  for (const auto& [name, emb] : report.embeddings)
    write_embedding(emb, out_dir / ("E_" + name + ".csv"));
  for (const auto& [name, p] : report.purity) j["purity"][name] = p;
  for (const auto& [name, s] : report.seconds) j["seconds"][name] = s;
  {
    std::ofstream labels(out_dir / "labels.csv");
    labels << "index,label\n";
    for (std::size_t i = 0; i < report.labels.size(); ++i)
      labels << i << ',' << report.labels[i] << '\n';
  }
  std::ofstream out(out_dir / "report.json");
  out << j.dump(2) << '\n';
}

}  // namespace nocollide
