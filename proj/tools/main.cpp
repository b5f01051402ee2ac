#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nocollide/experiments.hpp"
#include "nocollide/io.hpp"
#include "nocollide/parallel.hpp"
#include "nocollide/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nocollide;

namespace {

Vec2 parse_vec2(const std::string& s) {
  std::stringstream ss(s);
  std::string a, b;
  if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
    throw CLI::ValidationError("expected 'x,y', got '" + s + "'");
  return {std::stod(a), std::stod(b)};
}

std::pair<int, int> parse_grid(const std::string& s) {
  auto x = s.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("expected 'AxB', got '" + s + "'");
  return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

json shape_to_json(const ShapeSpec& s) {
  json j;
  j["kind"] = s.kind == ShapeKind::disk ? "disk" : s.kind == ShapeKind::ellipse ? "ellipse" : "gaussian";
  j["center"] = {s.center.x, s.center.y};
  j["shape"] = {{s.shape.m00, s.shape.m01}, {s.shape.m01, s.shape.m11}};
  return j;
}

ShapeSpec shape_from_json(const json& j) {
  ShapeSpec s;
  std::string kind = j.at("kind").get<std::string>();
  s.kind = kind == "disk" ? ShapeKind::disk : kind == "ellipse" ? ShapeKind::ellipse : ShapeKind::gaussian;
  s.center = {j.at("center")[0].get<double>(), j.at("center")[1].get<double>()};
  s.shape = {j.at("shape")[0][0].get<double>(), j.at("shape")[0][1].get<double>(),
             j.at("shape")[1][1].get<double>()};
  s.validate();
  return s;
}

struct Manifest {
  Family family;
  ShapeSpec base;
  std::vector<Vec2> thetas;
  std::vector<double> angles;
  GridFrame frame;
  std::vector<std::string> files;
};

void write_manifest(const Manifest& m, const fs::path& dir) {
  json j;
  j["family"] = to_string(m.family);
  j["base"] = shape_to_json(m.base);
  j["frame"] = {{"origin", {m.frame.origin.x, m.frame.origin.y}},
                {"spacing", m.frame.spacing},
                {"n", m.frame.n}};
  if (m.family == Family::rotation)
    j["angles"] = m.angles;
  else {
    json th = json::array();
    for (const Vec2& t : m.thetas) th.push_back({t.x, t.y});
    j["thetas"] = th;
  }
  j["files"] = m.files;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const fs::path& dir) {
  fs::path p = dir / "manifest.json";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  json j = json::parse(in);
  Manifest m;
  m.family = family_from_string(j.at("family").get<std::string>());
  m.base = shape_from_json(j.at("base"));
  if (j.contains("angles"))
    for (const auto& a : j.at("angles")) m.angles.push_back(a.get<double>());
  if (j.contains("thetas"))
    for (const auto& t : j.at("thetas")) m.thetas.push_back({t[0].get<double>(), t[1].get<double>()});
  m.frame.origin = {j.at("frame").at("origin")[0].get<double>(),
                    j.at("frame").at("origin")[1].get<double>()};
  m.frame.spacing = j.at("frame").at("spacing").get<double>();
  m.frame.n = j.at("frame").at("n").get<int>();
  for (const auto& f : j.at("files")) m.files.push_back(f.get<std::string>());
  return m;
}

std::vector<GridDensity> read_manifest_densities(const Manifest& m, const fs::path& dir) {
  std::vector<GridDensity> out;
  out.reserve(m.files.size());
  for (const auto& f : m.files) out.push_back(read_grid_density(dir / f));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-collision transportation maps: distances, embeddings and benchmarks"};
  app.require_subcommand(1);

  unsigned seed = 0;
  int threads = 0;
  std::string out_dir = ".";
  std::string format = "csv";
  app.add_option("--seed", seed, "Seed for randomized stages");
  app.add_option("--threads", threads, "Thread budget (default: NOCOLLIDE_THREADS or hardware)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--format", format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}));

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "Rasterize a transform family of a base shape");
  std::string gen_family = "translation", gen_grid = "4x4", gen_range = "-1,1", gen_u = "0,0";
  int gen_angles = 16, gen_n = 128, gen_ss = 4;
  double gen_a = 1.0, gen_b = 1.0, gen_radius = 1.0;
  bool gen_ellipse = false;
  gen->add_option("--family", gen_family, "translation|dilation|rotation")->required();
  gen->add_option("--grid", gen_grid, "Parameter grid AxB (translation/dilation)");
  gen->add_option("--range", gen_range, "Parameter range x0,x1[,y0,y1]");
  gen->add_option("--angles", gen_angles, "Number of equispaced rotation angles");
  gen->add_option("--n", gen_n, "Raster resolution")->check(CLI::Range(16, 4096));
  gen->add_option("--supersample", gen_ss, "Midpoint supersampling factor")->check(CLI::PositiveNumber);
  gen->add_option("--a", gen_a, "Ellipse semi-axis a");
  gen->add_option("--b", gen_b, "Ellipse semi-axis b");
  gen->add_option("--radius", gen_radius, "Disk radius");
  gen->add_option("--u", gen_u, "Base shape center 'x,y'");
  gen->add_flag("--ellipse", gen_ellipse, "Use an ellipse base (default: disk)");

  // ---- distmat ----
  auto* distmat = app.add_subcommand("distmat", "Compute a pairwise distance matrix");
  std::string dm_method, dm_input, dm_out = "";
  int dm_cuts = 2, dm_lot_res = 48;
  double dm_p = 2.0;
  std::string dm_weighting = "mass", dm_first_axis = "vertical";
  distmat->add_option("--method", dm_method, "nc-mass|nc-geom|lot|w2-exact|w2-analytic|pixel-euclidean")
      ->required();
  distmat->add_option("--input-dir", dm_input, "Directory produced by 'gen'")->required();
  distmat->add_option("--cuts", dm_cuts, "Slicing depth N")->check(CLI::NonNegativeNumber);
  distmat->add_option("--p", dm_p, "Feature distance exponent")->check(CLI::PositiveNumber);
  distmat->add_option("--weighting", dm_weighting, "mass|uniform")
      ->check(CLI::IsMember({"mass", "uniform"}));
  distmat->add_option("--first-axis", dm_first_axis, "vertical|horizontal")
      ->check(CLI::IsMember({"vertical", "horizontal"}));
  distmat->add_option("--lot-ref-resolution", dm_lot_res, "LOT reference raster resolution")
      ->check(CLI::PositiveNumber);
  distmat->add_option("--out", dm_out, "Output CSV (default <out-dir>/D_<method>.csv)");

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "Embed a distance matrix or feature table");
  std::string em_method, em_input, em_out = "";
  int em_k = 2, em_knn = 5, em_restarts = 4, em_iters = 300;
  embed->add_option("--method", em_method, "smacof|classical|svd|isomap")->required();
  embed->add_option("--k", em_k, "Embedding dimension")->check(CLI::PositiveNumber);
  embed->add_option("--input", em_input, "Distance CSV (features CSV for svd)")->required();
  embed->add_option("--knn", em_knn, "Isomap neighbour count")->check(CLI::PositiveNumber);
  embed->add_option("--restarts", em_restarts, "SMACOF restarts")->check(CLI::PositiveNumber);
  embed->add_option("--max-iter", em_iters, "SMACOF iteration cap")->check(CLI::PositiveNumber);
  embed->add_option("--out", em_out, "Output CSV (default <out-dir>/E_<method>.csv)");

  // ---- experiment ----
  auto* experiment = app.add_subcommand("experiment", "Run a spec-file experiment end to end");
  std::string ex_spec;
  experiment->add_option("--spec", ex_spec, "Experiment spec JSON")->required();

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "Distance-matrix timing sweep");
  std::string be_family = "translation", be_sizes = "9,16,25", be_methods = "nc-mass,lot";
  int be_n = 128, be_reps = 3, be_cuts = 2;
  bench->add_option("--family", be_family, "translation|dilation|rotation");
  bench->add_option("--sizes", be_sizes, "Ascending sample counts, comma separated");
  bench->add_option("--methods", be_methods, "Methods, comma separated");
  bench->add_option("--n", be_n, "Raster resolution");
  bench->add_option("--reps", be_reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  bench->add_option("--cuts", be_cuts, "Slicing depth for nc methods");

  // ---- mnist ----
  auto* mnist = app.add_subcommand("mnist", "MNIST embedding pipeline (IDX files)");
  std::string mn_images, mn_labels, mn_digits = "0,1";
  int mn_limit = 600, mn_cuts = 4, mn_knn = 5;
  bool mn_w2 = false, mn_lot = false;
  mnist->add_option("--images", mn_images, "IDX image file")->required();
  mnist->add_option("--labels", mn_labels, "IDX label file")->required();
  mnist->add_option("--digits", mn_digits, "Labels to keep, comma separated");
  mnist->add_option("--limit", mn_limit, "Sample cap")->check(CLI::NonNegativeNumber);
  mnist->add_option("--cuts", mn_cuts, "Slicing depth N")->check(CLI::NonNegativeNumber);
  mnist->add_option("--knn", mn_knn, "Isomap neighbour count")->check(CLI::PositiveNumber);
  mnist->add_flag("--with-w2", mn_w2, "Also compute exact pairwise W2");
  mnist->add_flag("--with-lot", mn_lot, "Also compute LOT distances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) set_thread_budget(threads);
    fs::path out(out_dir);

    if (gen->parsed()) {
      ExperimentSpec spec;
      spec.family = family_from_string(gen_family);
      spec.n = gen_n;
      spec.settings.supersample = gen_ss;
      spec.seed = seed;
      Vec2 u = parse_vec2(gen_u);
      if (gen->count("--a") || gen->count("--b") || gen_ellipse) {
        if (!(gen_a > 0) || !(gen_b > 0))
          throw CLI::ValidationError("--a/--b must be positive");
        spec.base = ShapeSpec::make_ellipse(gen_a, gen_b, u);
      } else {
        if (!(gen_radius > 0)) throw CLI::ValidationError("--radius must be positive");
        spec.base = ShapeSpec::make_disk(gen_radius, u);
      }
      if (spec.family == Family::rotation) {
        spec.angles = equispaced_angles(gen_angles);
      } else {
        auto [gx, gy] = parse_grid(gen_grid);
        std::vector<double> r;
        {
          std::stringstream ss(gen_range);
          std::string tok;
          while (std::getline(ss, tok, ',')) r.push_back(std::stod(tok));
        }
        if (r.size() == 2) r = {r[0], r[1], r[0], r[1]};
        if (r.size() != 4) throw CLI::ValidationError("--range expects x0,x1[,y0,y1]");
        spec.thetas = uniform_grid({r[0], r[2]}, {r[1], r[3]}, gx, gy);
      }
      spec.methods = {Method::nc_mass};  // validation only
      FamilyData fam = build_family(spec);

      fs::create_directories(out);
      Manifest man{spec.family, spec.base, spec.thetas, spec.angles, fam.frame, {}};
      for (std::size_t i = 0; i < fam.densities.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%03zu.csv", i);
        write_grid_density(fam.densities[i], out / name);
        man.files.push_back(name);
      }
      write_manifest(man, out);
      std::cout << "wrote " << man.files.size() << " densities to " << out.string() << "\n";
    }

    if (distmat->parsed()) {
      if (!fs::exists(dm_input)) throw std::runtime_error("input dir not found: " + dm_input);
      Manifest man = read_manifest(dm_input);
      Method method = method_from_string(dm_method);
      MethodSettings settings;
      settings.nc_mass_cuts = settings.nc_geom_cuts = dm_cuts;
      settings.p = dm_p;
      settings.weighting = dm_weighting == "uniform" ? Weighting::uniform : Weighting::mass;
      settings.first_axis = dm_first_axis == "horizontal" ? Axis::horizontal : Axis::vertical;
      settings.lot_ref_resolution = dm_lot_res;

      ExperimentSpec spec;
      spec.family = man.family;
      spec.base = man.base;
      spec.thetas = man.thetas;
      spec.angles = man.angles;
      spec.n = man.frame.n;
      spec.methods = {method};
      spec.settings = settings;
      spec.seed = seed;

      if (method == Method::w2_analytic) {
        std::size_t m = spec.sample_count();
        DistanceMatrix D(m);
        switch (man.family) {
          case Family::translation:
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = i + 1; j < m; ++j)
                D.set(i, j, analytic_w2_translation(man.thetas[i], man.thetas[j]));
            break;
          case Family::dilation: {
            GridDensity base = rasterize(man.base, man.frame, settings.supersample);
            Vec2 c = second_moments(base);
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = i + 1; j < m; ++j)
                D.set(i, j, analytic_w2_dilation(man.thetas[i], man.thetas[j], c));
            break;
          }
          case Family::rotation: {
            double trace = man.base.shape.trace(), det = man.base.shape.det();
            if (man.base.kind == ShapeKind::gaussian) { trace *= 4.0; det *= 16.0; }
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = i + 1; j < m; ++j)
                D.set(i, j, analytic_w2_rotation_cov(man.base.center, trace, det, man.angles[i],
                                                     man.angles[j]));
            break;
          }
        }
        fs::path target = dm_out.empty() ? out / ("D_" + to_string(method) + ".csv") : fs::path(dm_out);
        write_distance_matrix(D, target);
        std::cout << "wrote " << target.string() << "\n";
      } else {
        // reuse the generated rasters rather than re-rasterizing
        std::vector<GridDensity> ds = read_manifest_densities(man, dm_input);
        DistanceMatrix D;
        switch (method) {
          case Method::nc_mass:
            D = nc_distance_matrix(ds, {dm_cuts, settings.first_axis}, dm_p,
                                   FeatureKind::mass_center, settings.weighting);
            break;
          case Method::nc_geom:
            D = nc_distance_matrix(ds, {dm_cuts, settings.first_axis}, dm_p,
                                   FeatureKind::geom_center, settings.weighting);
            break;
          case Method::lot: {
            ShapeSpec gauss = ShapeSpec::make_gaussian(Mat2::diagonal(25.0, 25.0), {0, 0});
            double side = man.frame.spacing * man.frame.n;
            GridDensity ref = rasterize(gauss, dm_lot_res, dm_lot_res, man.frame.origin,
                                        side / dm_lot_res, 4);
            D = lot_distance_matrix(lot_embed(ref, ds));
            break;
          }
          case Method::w2_exact: {
            std::vector<PointCloud> clouds(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i) clouds[i] = to_pointcloud(ds[i], 0.0);
            D = DistanceMatrix(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i)
              for (std::size_t j = i + 1; j < ds.size(); ++j)
                D.set(i, j, exact_w2(clouds[i], clouds[j]).distance);
            break;
          }
          case Method::pixel_euclidean: {
            D = DistanceMatrix(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i)
              for (std::size_t j = i + 1; j < ds.size(); ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < ds[i].mass.size(); ++p) {
                  double d = ds[i].mass[p] - ds[j].mass[p];
                  acc += d * d;
                }
                D.set(i, j, std::sqrt(acc));
              }
            break;
          }
          default: break;
        }
        fs::path target = dm_out.empty() ? out / ("D_" + to_string(method) + ".csv") : fs::path(dm_out);
        write_distance_matrix(D, target);
        std::cout << "wrote " << target.string() << "\n";
      }
    }

    if (embed->parsed()) {
      Embedding result;
      if (em_method == "svd") {
        Matrix features = read_matrix_csv(em_input);
        result = svd_embed(features, em_k);
      } else {
        DistanceMatrix D = read_distance_matrix(em_input);
        if (em_method == "classical")
          result = classical_mds(D, em_k);
        else if (em_method == "smacof")
          result = smacof_mds(D, em_k, seed, {em_restarts, em_iters, 1e-9});
        else if (em_method == "isomap")
          result = isomap(D, em_knn, em_k);
        else
          throw CLI::ValidationError("unknown embed method '" + em_method + "'");
      }
      fs::path target = em_out.empty() ? out / ("E_" + em_method + ".csv") : fs::path(em_out);
      write_embedding(result, target);
      std::cout << "wrote " << target.string() << "\n";
    }

    if (experiment->parsed()) {
      std::ifstream in(ex_spec);
      if (!in) throw std::runtime_error("cannot read spec file: " + ex_spec);
      json j = json::parse(in);
      ExperimentSpec spec = parse_experiment_spec(j);
      if (seed != 0) spec.seed = seed;
      ExperimentReport report = run_experiment(spec);
      write_report(report, out);
      std::cout << "report written to " << out.string() << "\n";
      for (const auto& [method, res] : report.results)
        if (!res.error.empty())
          std::cout << "note: " << to_string(method) << " failed: " << res.error << "\n";
    }

    if (bench->parsed()) {
      std::vector<int> sizes;
      {
        std::stringstream ss(be_sizes);
        std::string tok;
        while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
      }
      std::vector<Method> methods;
      {
        std::stringstream ss(be_methods);
        std::string tok;
        while (std::getline(ss, tok, ',')) methods.push_back(method_from_string(tok));
      }
      MethodSettings settings;
      settings.nc_mass_cuts = settings.nc_geom_cuts = be_cuts;
      auto rows = timing_sweep(family_from_string(be_family), sizes, methods, settings, be_n, be_reps);
      fs::path target = out / "timings.csv";
      write_timing_csv(rows, target);
      std::cout << "wrote " << target.string() << "\n";
    }

    if (mnist->parsed()) {
      MnistSpec spec;
      spec.images_path = mn_images;
      spec.labels_path = mn_labels;
      spec.digits.clear();
      {
        std::stringstream ss(mn_digits);
        std::string tok;
        while (std::getline(ss, tok, ',')) spec.digits.insert(std::stoi(tok));
      }
      spec.limit = static_cast<std::size_t>(mn_limit);
      spec.cuts = mn_cuts;
      spec.k_neighbors = mn_knn;
      spec.with_w2 = mn_w2;
      spec.with_lot = mn_lot;
      spec.seed = seed;
      MnistReport report = mnist_pipeline(spec);
      write_mnist_report(report, out);
      std::cout << "report written to " << out.string() << " (" << report.count << " digits)\n";
    }

    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
