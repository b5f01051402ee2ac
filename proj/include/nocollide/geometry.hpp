#pragma once

#include <cmath>
#include <stdexcept>

namespace nocollide {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }

  // Hadamard product
  Vec2 cwise(const Vec2& o) const { return {x * o.x, y * o.y}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Symmetric 2x2 matrix, used for ellipse shape matrices and Gaussian
// covariances.
struct Mat2 {
  double m00 = 1.0;
  double m01 = 0.0;
  double m11 = 1.0;

  static Mat2 diagonal(double a, double b) { return {a, 0.0, b}; }
  static Mat2 identity() { return diagonal(1.0, 1.0); }

  double det() const { return m00 * m11 - m01 * m01; }
  double trace() const { return m00 + m11; }

  Mat2 inverse() const {
    double d = det();
    if (!(d > 0.0)) throw std::invalid_argument("matrix not positive definite");
    return {m11 / d, -m01 / d, m00 / d};
  }

  Vec2 apply(const Vec2& v) const {
    return {m00 * v.x + m01 * v.y, m01 * v.x + m11 * v.y};
  }

  // R_t * M * R_{-t} for the counter-clockwise rotation R_t
  Mat2 rotated(double t) const {
    double c = std::cos(t), s = std::sin(t);
    // R M = [c*m00 - s*m01, c*m01 - s*m11; s*m00 + c*m01, s*m01 + c*m11]
    double a = c * m00 - s * m01, b = c * m01 - s * m11;
    double d = s * m00 + c * m01, e = s * m01 + c * m11;
    // (R M) R^T
    return {a * c - b * s, a * s + b * c, d * s + e * c};
  }

  // Eigenvalues, descending. Both are real since the matrix is symmetric.
  void eigenvalues(double& hi, double& lo) const {
    double mean = 0.5 * trace();
    double disc = std::sqrt(std::max(0.0, mean * mean - det()));
    hi = mean + disc;
    lo = mean - disc;
  }

  bool positive_definite() const { return m00 > 0.0 && det() > 0.0; }
};

inline Vec2 rotate(const Vec2& v, double t) {
  double c = std::cos(t), s = std::sin(t);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct BBox {
  Vec2 lo{0, 0};
  Vec2 hi{0, 0};

  void expand(const BBox& o) {
    lo.x = std::min(lo.x, o.lo.x);
    lo.y = std::min(lo.y, o.lo.y);
    hi.x = std::max(hi.x, o.hi.x);
    hi.y = std::max(hi.y, o.hi.y);
  }
};

}  // namespace nocollide
