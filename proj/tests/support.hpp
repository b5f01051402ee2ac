#pragma once

// Shared helpers for the test suites: deterministic random densities, a
// brute-force optimal-transport oracle that enumerates LP vertices, and a
// writer for synthetic IDX digit files.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include "nocollide/density.hpp"

namespace nctest {

using nocollide::GridDensity;
using nocollide::PointCloud;
using nocollide::Vec2;

inline bool near(double a, double b, double abs_tol) { return std::abs(a - b) <= abs_tol; }

// Random mixture-of-blobs density on a small grid. Every pixel of each
// blob's box gets positive mass so supports are well connected.
inline GridDensity random_density(std::mt19937_64& rng, int n = 48) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GridDensity d;
  d.width = d.height = n;
  d.origin = {0, 0};
  d.spacing = 1.0 / n;
  d.mass.assign(static_cast<std::size_t>(n) * n, 0.0);
  int blobs = 1 + static_cast<int>(unif(rng) * 3);
  for (int b = 0; b < blobs; ++b) {
    double cx = 0.2 + 0.6 * unif(rng), cy = 0.2 + 0.6 * unif(rng);
    double sx = 0.05 + 0.15 * unif(rng), sy = 0.05 + 0.15 * unif(rng);
    double amp = 0.2 + unif(rng);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec2 p = d.pixel_center(i, j);
        double qx = (p.x - cx) / sx, qy = (p.y - cy) / sy;
        double q = qx * qx + qy * qy;
        if (q < 12.0) d.at(i, j) += amp * std::exp(-0.5 * q);
      }
  }
  d.normalize();
  return d;
}

inline PointCloud random_cloud(std::mt19937_64& rng, int max_points = 6, int min_points = 1) {
  std::uniform_int_distribution<int> count(min_points, max_points);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  PointCloud pc;
  int n = count(rng);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    pc.points.push_back({coord(rng), coord(rng)});
    pc.weights.push_back(weight(rng));
    total += pc.weights.back();
  }
  for (double& w : pc.weights) w /= total;
  return pc;
}

// Exact W2^2 oracle: enumerates every spanning tree of the complete
// bipartite graph (each LP-vertex of the transportation polytope is a tree
// solution), solves the tree flow by leaf elimination and keeps the best
// feasible cost. Exponential, so only for tiny instances.
inline double w2_squared_bruteforce(const PointCloud& a, const PointCloud& b) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  const int V = n + m;
  const int need = V - 1;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> cost;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      edges.emplace_back(i, n + j);
      cost.push_back((a.points[i] - b.points[j]).norm2());
    }
  const int E = static_cast<int>(edges.size());

  std::vector<int> uf(V);
  auto find = [&](int v) {
    while (uf[v] != v) v = uf[v];
    return v;
  };

  std::vector<int> chosen;
  double best = std::numeric_limits<double>::infinity();

  // Tree flow by leaf elimination over the chosen edges.
  auto evaluate = [&]() {
    std::vector<double> residual(V);
    for (int i = 0; i < n; ++i) residual[i] = a.weights[i];
    for (int j = 0; j < m; ++j) residual[n + j] = -b.weights[j];
    std::vector<int> degree(V, 0);
    std::vector<std::vector<int>> incident(V);
    for (int e : chosen) {
      degree[edges[e].first]++;
      degree[edges[e].second]++;
      incident[edges[e].first].push_back(e);
      incident[edges[e].second].push_back(e);
    }
    std::vector<bool> done_edge(E, false), done_node(V, false);
    std::vector<int> leaves;
    for (int v = 0; v < V; ++v)
      if (degree[v] == 1) leaves.push_back(v);
    double total = 0.0;
    for (int processed = 0; processed + 1 < V;) {
      if (leaves.empty()) return;  // not a tree (cannot happen)
      int v = leaves.back();
      leaves.pop_back();
      if (done_node[v]) continue;
      int edge = -1;
      for (int e : incident[v])
        if (!done_edge[e]) { edge = e; break; }
      if (edge < 0) continue;
      // flow on this edge routes v's residual toward the other endpoint;
      // positive flow must run source -> target
      auto [x, y] = edges[edge];
      int other = x == v ? y : x;
      double flow = v < n ? residual[v] : -residual[v];
      if (flow < -1e-12) return;  // infeasible vertex
      total += std::max(0.0, flow) * cost[edge];
      residual[other] += residual[v];
      residual[v] = 0;
      done_edge[edge] = true;
      done_node[v] = true;
      if (--degree[other] == 1) leaves.push_back(other);
      degree[v] = 0;
      ++processed;
    }
    best = std::min(best, total);
  };

  // Backtracking enumeration of spanning trees: at each step either take
  // edge e (if it joins two components) or skip it, pruning branches that
  // cannot reach V-1 edges.
  auto rec = [&](auto&& self, int e, int joined) -> void {
    if (joined == need) {
      evaluate();
      return;
    }
    if (E - e < need - joined) return;
    int ra = find(edges[e].first), rb = find(edges[e].second);
    if (ra != rb) {
      uf[ra] = rb;
      chosen.push_back(e);
      self(self, e + 1, joined + 1);
      chosen.pop_back();
      uf[ra] = ra;
    }
    self(self, e + 1, joined);
  };
  for (int v = 0; v < V; ++v) uf[v] = v;
  rec(rec, 0, 0);
  return best;
}

// Synthetic 0/1 digit pair in the published IDX format: rings for '0',
// slightly slanted bars for '1', with jittered geometry so the two classes
// form a connected neighbourhood graph.
inline void write_synthetic_mnist(const std::filesystem::path& images_path,
                                  const std::filesystem::path& labels_path, int per_class,
                                  unsigned seed) {
  const int side = 28;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<std::uint8_t>> images;
  std::vector<std::uint8_t> labels;

  auto render = [&](auto&& inside) {
    std::vector<std::uint8_t> img(side * side, 0);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) {
        double x = c + 0.5, y = r + 0.5;
        if (inside(x, y)) img[r * side + c] = static_cast<std::uint8_t>(180 + 60 * unif(rng));
      }
    return img;
  };

  for (int k = 0; k < per_class; ++k) {
    {  // '0': elliptical annulus. A thin tail of narrow specimens reaches
      // toward the widest bars so the joint neighbourhood graph stays
      // connected at small k without blurring the clusters.
      double cx = 12.5 + 3.0 * unif(rng), cy = 12.5 + 3.0 * unif(rng);
      double rx = 2.5 + 7.0 * std::cbrt(unif(rng));
      double ry = 6.0 + 5.0 * unif(rng);
      double thick = 0.35 + 0.45 * unif(rng);
      images.push_back(render([&](double x, double y) {
        double q = ((x - cx) / rx) * ((x - cx) / rx) + ((y - cy) / ry) * ((y - cy) / ry);
        return q <= 1.0 && q >= (1.0 - thick) * (1.0 - thick);
      }));
      labels.push_back(0);
    }
    {  // '1': slanted bar, mostly narrow with a thin tail of wide slabs
      double cx = 11.5 + 5.0 * unif(rng);
      double u = unif(rng);
      double halfw = 0.8 + 2.6 * u * u * u;
      double slant = (unif(rng) - 0.5) * 0.6;
      double y0 = 4.0 + 3.0 * unif(rng), y1 = 20.0 + 4.0 * unif(rng);
      images.push_back(render([&](double x, double y) {
        double center = cx + slant * (y - 14.0);
        return y >= y0 && y <= y1 && std::abs(x - center) <= halfw;
      }));
      labels.push_back(1);
    }
  }

  // deterministic shuffle so classes interleave
  std::vector<std::size_t> order(images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  auto put_u32 = [](std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
  };

  std::ofstream img(images_path, std::ios::binary);
  put_u32(img, 0x00000803u);
  put_u32(img, static_cast<std::uint32_t>(images.size()));
  put_u32(img, side);
  put_u32(img, side);
  for (std::size_t i : order)
    img.write(reinterpret_cast<const char*>(images[i].data()),
              static_cast<std::streamsize>(images[i].size()));

  std::ofstream lab(labels_path, std::ios::binary);
  put_u32(lab, 0x00000801u);
  put_u32(lab, static_cast<std::uint32_t>(labels.size()));
  for (std::size_t i : order) lab.put(static_cast<char>(labels[i]));
}

}  // namespace nctest
