#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nocollide {

// Dense symmetric nonnegative matrix with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t m) : size_(m), d_(m * m, 0.0) {}

  std::size_t size() const { return size_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * size_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    d_[i * size_ + j] = v;
    d_[j * size_ + i] = v;
  }

  double max() const { return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end()); }

  void validate(double tol = 1e-12) const {
    for (std::size_t i = 0; i < size_; ++i) {
      if (std::abs((*this)(i, i)) > tol)
        throw std::runtime_error("distance matrix: nonzero diagonal");
      for (std::size_t j = 0; j < size_; ++j) {
        double v = (*this)(i, j);
        if (!(v >= 0.0) || !std::isfinite(v))
          throw std::runtime_error("distance matrix: invalid entry");
        if (std::abs(v - (*this)(j, i)) > tol)
          throw std::runtime_error("distance matrix: asymmetric");
      }
    }
  }

  const std::vector<double>& data() const { return d_; }
  std::vector<double>& data() { return d_; }

 private:
  std::size_t size_ = 0;
  std::vector<double> d_;
};

}  // namespace nocollide
