#include "nocollide/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nocollide/parallel.hpp"

namespace nocollide {

double GridDensity::total_mass() const {
  double s = 0.0;
  for (double v : mass) s += v;
  return s;
}

Vec2 GridDensity::mean() const {
  Vec2 m{0, 0};
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      double w = at(i, j);
      if (w > 0.0) m += w * pixel_center(i, j);
    }
  return m;
}

void GridDensity::normalize() {
  double s = total_mass();
  if (!(s > 0.0)) throw std::runtime_error("density: normalize on zero total mass");
  for (double& v : mass) v /= s;
}

void GridDensity::validate(double tol) const {
  if (width < 1 || height < 1) throw std::runtime_error("density: empty grid");
  if (!(spacing > 0.0)) throw std::runtime_error("density: non-positive spacing");
  if (mass.size() != static_cast<std::size_t>(width) * height)
    throw std::runtime_error("density: mass array size mismatch");
  for (double v : mass)
    if (!(v >= 0.0)) throw std::runtime_error("density: negative mass");
  if (std::abs(total_mass() - 1.0) > tol)
    throw std::runtime_error("density: mass not normalized");
}

void PointCloud::validate(double tol) const {
  if (points.size() != weights.size())
    throw std::runtime_error("point cloud: points/weights length mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::runtime_error("point cloud: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > tol) throw std::runtime_error("point cloud: weights not normalized");
}

ShapeSpec ShapeSpec::make_disk(double radius, Vec2 center) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk: radius must be positive");
  return {ShapeKind::disk, center, Mat2::diagonal(radius * radius, radius * radius)};
}

ShapeSpec ShapeSpec::make_ellipse(double a, double b, Vec2 center) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("ellipse: semi-axes must be positive");
  return {ShapeKind::ellipse, center, Mat2::diagonal(a * a, b * b)};
}

ShapeSpec ShapeSpec::make_gaussian(Mat2 covariance, Vec2 center) {
  if (!covariance.positive_definite())
    throw std::invalid_argument("gaussian: covariance must be positive definite");
  return {ShapeKind::gaussian, center, covariance};
}

bool ShapeSpec::axis_aligned(double tol) const {
  return std::abs(shape.m01) <= tol * (std::abs(shape.m00) + std::abs(shape.m11));
}

double ShapeSpec::semi_major() const {
  double hi, lo;
  shape.eigenvalues(hi, lo);
  return std::sqrt(hi);
}

double ShapeSpec::semi_minor() const {
  double hi, lo;
  shape.eigenvalues(hi, lo);
  return std::sqrt(std::max(0.0, lo));
}

BBox ShapeSpec::bounds() const {
  // Axis-aligned half extents of {x : x^T S^{-1} x <= 1} are sqrt(diag(S));
  // for Gaussians use the 4-sigma box.
  double ex = std::sqrt(std::max(0.0, shape.m00));
  double ey = std::sqrt(std::max(0.0, shape.m11));
  double f = kind == ShapeKind::gaussian ? 4.0 : 1.0;
  return {{center.x - f * ex, center.y - f * ey}, {center.x + f * ex, center.y + f * ey}};
}

void ShapeSpec::validate() const {
  if (!shape.positive_definite()) throw std::invalid_argument("shape matrix not positive definite");
}

GridFrame square_frame(const BBox& box, int n, double pad) {
  if (n < 1) throw std::invalid_argument("frame: grid size must be positive");
  Vec2 c{0.5 * (box.lo.x + box.hi.x), 0.5 * (box.lo.y + box.hi.y)};
  double side = std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y) * (1.0 + pad);
  if (!(side > 0.0)) throw std::invalid_argument("frame: degenerate bounding box");
  return {{c.x - 0.5 * side, c.y - 0.5 * side}, side / n, n};
}

GridDensity rasterize(const ShapeSpec& shape, int width, int height, Vec2 origin,
                      double spacing, int supersample) {
  if (!(spacing > 0.0)) throw std::invalid_argument("rasterize: non-positive spacing");
  if (supersample < 1) throw std::invalid_argument("rasterize: supersample must be positive");
  shape.validate();

  GridDensity d;
  d.width = width;
  d.height = height;
  d.origin = origin;
  d.spacing = spacing;
  d.mass.assign(static_cast<std::size_t>(width) * height, 0.0);

  const Mat2 inv = shape.shape.inverse();
  const bool gaussian = shape.kind == ShapeKind::gaussian;
  const double ss = supersample;

  // Restrict the scan to pixels overlapping the support box.
  BBox bb = shape.bounds();
  int i0 = std::max(0, static_cast<int>(std::floor((bb.lo.x - origin.x) / spacing)));
  int i1 = std::min(width - 1, static_cast<int>(std::ceil((bb.hi.x - origin.x) / spacing)));
  int j0 = std::max(0, static_cast<int>(std::floor((bb.lo.y - origin.y) / spacing)));
  int j1 = std::min(height - 1, static_cast<int>(std::ceil((bb.hi.y - origin.y) / spacing)));

  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      double acc = 0.0;
      for (int sj = 0; sj < supersample; ++sj) {
        double y = origin.y + (j + (sj + 0.5) / ss) * spacing - shape.center.y;
        for (int si = 0; si < supersample; ++si) {
          double x = origin.x + (i + (si + 0.5) / ss) * spacing - shape.center.x;
          double q = inv.m00 * x * x + 2.0 * inv.m01 * x * y + inv.m11 * y * y;
          if (gaussian) {
            if (q <= 16.0) acc += std::exp(-0.5 * q);
          } else {
            if (q <= 1.0) acc += 1.0;
          }
        }
      }
      d.at(i, j) = acc;
    }
  }

  if (!(d.total_mass() > 0.0)) throw std::runtime_error("rasterize: empty rasterization");
  d.normalize();
  return d;
}

GridDensity rasterize(const ShapeSpec& shape, const GridFrame& frame, int supersample) {
  return rasterize(shape, frame.n, frame.n, frame.origin, frame.spacing, supersample);
}

ShapeSpec apply_transform(const ShapeSpec& shape, const TransformSpec& t) {
  ShapeSpec out = shape;
  switch (t.kind) {
    case TransformSpec::Kind::translate:
      out.center += t.vec;
      return out;
    case TransformSpec::Kind::dilate: {
      if (!(t.vec.x > 0.0 && t.vec.y > 0.0))
        throw std::invalid_argument("dilate: components must be positive");
      if (!shape.axis_aligned())
        throw std::invalid_argument("unsupported composition: dilation of a rotated shape");
      out.center = t.vec.cwise(shape.center);
      out.shape = Mat2::diagonal(t.vec.x * t.vec.x * shape.shape.m00,
                                 t.vec.y * t.vec.y * shape.shape.m11);
      if (out.kind == ShapeKind::disk && std::abs(out.shape.m00 - out.shape.m11) > 0.0)
        out.kind = ShapeKind::ellipse;
      return out;
    }
    case TransformSpec::Kind::rotate:
      out.center = rotate(shape.center, t.angle);
      out.shape = shape.shape.rotated(t.angle);
      return out;
  }
  throw std::logic_error("unreachable");
}

PointCloud to_pointcloud(const GridDensity& d, double threshold) {
  PointCloud pc;
  double kept = 0.0;
  for (int j = 0; j < d.height; ++j)
    for (int i = 0; i < d.width; ++i) {
      double w = d.at(i, j);
      if (w > threshold) {
        pc.points.push_back(d.pixel_center(i, j));
        pc.weights.push_back(w);
        kept += w;
      }
    }
  if (pc.points.empty() || !(kept > 0.0)) throw std::runtime_error("to_pointcloud: empty support");
  for (double& w : pc.weights) w /= kept;
  return pc;
}

Vec2 second_moments(const GridDensity& d) {
  double cx = 0.0, cy = 0.0;
  for (int j = 0; j < d.height; ++j)
    for (int i = 0; i < d.width; ++i) {
      double w = d.at(i, j);
      if (w > 0.0) {
        Vec2 p = d.pixel_center(i, j);
        cx += w * p.x * p.x;
        cy += w * p.y * p.y;
      }
    }
  return {std::sqrt(cx), std::sqrt(cy)};
}

GridDensity shift_pixels(const GridDensity& d, int di, int dj) {
  GridDensity out = d;
  std::fill(out.mass.begin(), out.mass.end(), 0.0);
  for (int j = 0; j < d.height; ++j)
    for (int i = 0; i < d.width; ++i) {
      double w = d.at(i, j);
      if (w == 0.0) continue;
      int ni = i + di, nj = j + dj;
      if (ni < 0 || ni >= d.width || nj < 0 || nj >= d.height)
        throw std::invalid_argument("shift_pixels: support leaves the grid");
      out.at(ni, nj) = w;
    }
  return out;
}

}  // namespace nocollide
