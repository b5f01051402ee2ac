#include "nocollide/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nocollide {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("io: cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("io: cannot read " + p.string());
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& p) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error("io: bad number '" + s + "' in " + p.string());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("io: number formatting failed");
  return std::string(buf, end);
}

void write_grid_density(const GridDensity& d, const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  for (int j = 0; j < d.height; ++j) {
    for (int i = 0; i < d.width; ++i) {
      if (i) out << ',';
      out << format_double(d.at(i, j));
    }
    out << '\n';
  }
  nlohmann::json meta;
  meta["width"] = d.width;
  meta["height"] = d.height;
  meta["origin"] = {d.origin.x, d.origin.y};
  meta["spacing"] = d.spacing;
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  open_out(side) << meta.dump(2) << '\n';
}

GridDensity read_grid_density(const std::filesystem::path& csv_path) {
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  nlohmann::json meta = nlohmann::json::parse(open_in(side));
  GridDensity d;
  d.width = meta.at("width").get<int>();
  d.height = meta.at("height").get<int>();
  d.origin = {meta.at("origin")[0].get<double>(), meta.at("origin")[1].get<double>()};
  d.spacing = meta.at("spacing").get<double>();
  d.mass.assign(static_cast<std::size_t>(d.width) * d.height, 0.0);

  auto in = open_in(csv_path);
  std::string line;
  for (int j = 0; j < d.height; ++j) {
    if (!std::getline(in, line))
      throw std::runtime_error("io: truncated density CSV " + csv_path.string());
    auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != d.width)
      throw std::runtime_error("io: row width mismatch in " + csv_path.string());
    for (int i = 0; i < d.width; ++i) d.at(i, j) = parse_double(cells[i], csv_path);
  }
  return d;
}

void write_distance_matrix(const DistanceMatrix& D, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "index";
  for (std::size_t j = 0; j < D.size(); ++j) out << ',' << j;
  out << '\n';
  for (std::size_t i = 0; i < D.size(); ++i) {
    out << i;
    for (std::size_t j = 0; j < D.size(); ++j) out << ',' << format_double(D(i, j));
    out << '\n';
  }
}

DistanceMatrix read_distance_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("io: empty matrix CSV " + path.string());
  std::size_t m = split_csv(line).size() - 1;
  DistanceMatrix D(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("io: truncated matrix CSV " + path.string());
    auto cells = split_csv(line);
    if (cells.size() != m + 1)
      throw std::runtime_error("io: row width mismatch in " + path.string());
    for (std::size_t j = 0; j < m; ++j)
      D.data()[i * m + j] = parse_double(cells[j + 1], path);
  }
  D.validate(1e-9);
  return D;
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path,
                      const std::string& index_label) {
  auto out = open_out(path);
  out << index_label;
  for (std::size_t j = 0; j < m.cols; ++j) out << ",x" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < m.rows; ++i) {
    out << i;
    for (std::size_t j = 0; j < m.cols; ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("io: empty CSV " + path.string());
  std::size_t cols = split_csv(line).size() - 1;
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != cols + 1)
      throw std::runtime_error("io: row width mismatch in " + path.string());
    for (std::size_t j = 1; j < cells.size(); ++j) data.push_back(parse_double(cells[j], path));
    ++rows;
  }
  Matrix m(rows, cols);
  m.data = std::move(data);
  return m;
}

void write_embedding(const Embedding& e, const std::filesystem::path& csv_path) {
  write_matrix_csv(e.coords, csv_path);
  nlohmann::json meta;
  meta["method"] = e.method;
  meta["stress"] = e.stress;
  meta["seed"] = e.seed;
  meta["residual"] = e.residual;
  meta["iterations"] = e.iterations;
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  open_out(side) << meta.dump(2) << '\n';
}

void write_feature_set(const FeatureSet& fs, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "address,mass,xm_x,xm_y,xg_x,xg_y\n";
  for (std::size_t k = 0; k < fs.size(); ++k) {
    out << fs.addresses[k] << ',' << format_double(fs.masses[k]) << ','
        << format_double(fs.mass_centers[k].x) << ',' << format_double(fs.mass_centers[k].y)
        << ',' << format_double(fs.geom_centers[k].x) << ','
        << format_double(fs.geom_centers[k].y) << '\n';
  }
}

FeatureSet read_feature_set(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("io: empty feature CSV " + path.string());
  FeatureSet fs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 6) throw std::runtime_error("io: bad feature row in " + path.string());
    fs.addresses.push_back(cells[0]);
    fs.masses.push_back(parse_double(cells[1], path));
    fs.mass_centers.push_back({parse_double(cells[2], path), parse_double(cells[3], path)});
    fs.geom_centers.push_back({parse_double(cells[4], path), parse_double(cells[5], path)});
  }
  return fs;
}

void write_transport_plan(const TransportPlan& plan, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "i,j,mass\n";
  for (const auto& e : plan.entries)
    out << e.i << ',' << e.j << ',' << format_double(e.mass) << '\n';
}

}  // namespace nocollide
