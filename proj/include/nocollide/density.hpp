#pragma once

#include <string>
#include <vector>

#include "nocollide/geometry.hpp"

namespace nocollide {

// Normalized nonnegative mass field on a regular pixel grid. Pixel (i, j)
// has its center at origin + ((i + 0.5) * spacing, (j + 0.5) * spacing);
// the mass array is row-major with index j * width + i and row 0 at the
// bottom of the frame.
struct GridDensity {
  int width = 0;
  int height = 0;
  Vec2 origin{0, 0};
  double spacing = 1.0;
  std::vector<double> mass;

  double& at(int i, int j) { return mass[static_cast<std::size_t>(j) * width + i]; }
  double at(int i, int j) const { return mass[static_cast<std::size_t>(j) * width + i]; }

  Vec2 pixel_center(int i, int j) const {
    return {origin.x + (i + 0.5) * spacing, origin.y + (j + 0.5) * spacing};
  }

  double total_mass() const;
  Vec2 mean() const;

  // Scales the mass array to total 1. Throws if the total is zero.
  void normalize();
  // Checks the type invariants (nonnegative, normalized, positive spacing).
  void validate(double tol = 1e-12) const;
};

struct PointCloud {
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  void validate(double tol = 1e-12) const;
};

enum class ShapeKind { disk, ellipse, gaussian };

// Disk/ellipse: uniform measure on (x-u)^T S^{-1} (x-u) <= 1 where S has
// eigenvalues a^2, b^2. Gaussian: covariance S, truncated at 4 sigma when
// rasterized. Rotations are stored by rotating S, so a once-rotated
// ellipse remains exactly representable.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::disk;
  Vec2 center{0, 0};
  Mat2 shape = Mat2::identity();

  static ShapeSpec make_disk(double radius, Vec2 center = {0, 0});
  static ShapeSpec make_ellipse(double a, double b, Vec2 center = {0, 0});
  static ShapeSpec make_gaussian(Mat2 covariance, Vec2 center = {0, 0});

  bool axis_aligned(double tol = 1e-12) const;
  // Semi-axes (any orientation): square roots of the shape eigenvalues.
  double semi_major() const;
  double semi_minor() const;
  // Support box: exact for ellipses, the 4-sigma box for Gaussians.
  BBox bounds() const;
  void validate() const;
};

struct TransformSpec {
  enum class Kind { translate, dilate, rotate };
  Kind kind = Kind::translate;
  Vec2 vec{0, 0};
  double angle = 0.0;

  static TransformSpec translate(Vec2 theta) { return {Kind::translate, theta, 0.0}; }
  static TransformSpec dilate(Vec2 theta) { return {Kind::dilate, theta, 0.0}; }
  static TransformSpec rotate(double t) { return {Kind::rotate, {0, 0}, t}; }
};

// Square physical frame for rasterization.
struct GridFrame {
  Vec2 origin{0, 0};
  double spacing = 1.0;
  int n = 0;
};

// Smallest centered square frame covering the box, padded by the given
// fraction of its extent.
GridFrame square_frame(const BBox& box, int n, double pad = 0.1);

// Pixel masses proportional to the shape measure of each pixel square,
// estimated with supersample x supersample midpoint samples, then
// normalized. Throws "empty rasterization" when the support misses the
// grid entirely.
GridDensity rasterize(const ShapeSpec& shape, int width, int height, Vec2 origin,
                      double spacing, int supersample = 4);
GridDensity rasterize(const ShapeSpec& shape, const GridFrame& frame, int supersample = 4);

// Exact pushforward of the shape parameters. Dilation requires an
// axis-aligned shape; rotating an ellipse yields its covariance form.
ShapeSpec apply_transform(const ShapeSpec& shape, const TransformSpec& t);

// One weighted point per pixel with mass strictly above the threshold,
// renormalized. Throws "empty support" when nothing survives.
PointCloud to_pointcloud(const GridDensity& d, double threshold = 0.0);

// c with c_j = sqrt(sum_p mass_p * coord_j(p)^2), the per-axis second
// moments about the physical origin.
Vec2 second_moments(const GridDensity& d);

// Mass array shifted by (di, dj) pixels on the same frame; shifted-out
// entries must be empty. Renormalization is not needed: the total is
// preserved exactly.
GridDensity shift_pixels(const GridDensity& d, int di, int dj);

}  // namespace nocollide
