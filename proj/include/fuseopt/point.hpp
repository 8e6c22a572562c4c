#ifndef FUSEOPT_POINT_HPP
#define FUSEOPT_POINT_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fuseopt/errors.hpp"

namespace fuseopt {

/// Dense d-dimensional real vector. Used for parameters, gradients,
/// directions and curvature pairs alike. Construction rejects empty
/// vectors and non-finite entries; arithmetic helpers below return new
/// points, so a Point that exists is always finite.
class Point {
 public:
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) {
      throw invalid_dimension_error("point must have dimension >= 1");
    }
    for (double c : coords_) {
      if (!std::isfinite(c)) {
        throw numeric_error("non-finite coordinate in point");
      }
    }
  }

  static Point zeros(std::size_t d) { return Point(std::vector<double>(d, 0.0)); }
  static Point ones(std::size_t d) { return Point(std::vector<double>(d, 1.0)); }

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  auto begin() const { return coords_.begin(); }
  auto end() const { return coords_.end(); }

  bool operator==(const Point& other) const { return coords_ == other.coords_; }

 private:
  std::vector<double> coords_;
};

inline void require_same_dim(const Point& a, const Point& b, const char* what) {
  if (a.size() != b.size()) {
    throw invalid_dimension_error(std::string(what) + ": dimension mismatch (" +
                                  std::to_string(a.size()) + " vs " +
                                  std::to_string(b.size()) + ")");
  }
}

inline void require_dim(const Point& x, std::size_t d, const char* what) {
  if (x.size() != d) {
    throw invalid_dimension_error(std::string(what) + ": expected dimension " +
                                  std::to_string(d) + ", got " +
                                  std::to_string(x.size()));
  }
}

inline double dot(const Point& a, const Point& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Point& a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

/// x + c * p
inline Point add_scaled(const Point& x, double c, const Point& p) {
  require_same_dim(x, p, "add_scaled");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + c * p[i];
  return Point(std::move(out));
}

inline Point subtract(const Point& a, const Point& b) {
  require_same_dim(a, b, "subtract");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return Point(std::move(out));
}

inline Point negate(const Point& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return Point(std::move(out));
}

/// theta * a + (1 - theta) * b, exact at the endpoints so that a blend
/// with theta in {0, 1} reproduces the corresponding input bit for bit.
inline Point blend(double theta, const Point& a, const Point& b) {
  require_same_dim(a, b, "blend");
  if (theta == 1.0) return a;
  if (theta == 0.0) return b;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = theta * a[i] + (1.0 - theta) * b[i];
  }
  return Point(std::move(out));
}

/// Small dense row-major matrix. Only what the quadratic objective and
/// the dense BFGS test oracle need.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw invalid_dimension_error("matrix must have at least one row and column");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Point apply(const Point& x) const {
    require_dim(x, cols_, "matrix apply");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      out[i] = s;
    }
    return Point(std::move(out));
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline bool is_symmetric(const Matrix& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) scale = std::max(scale, std::abs(a(i, j)));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol * std::max(1.0, scale)) return false;
  return true;
}

}  // namespace fuseopt

#endif  // FUSEOPT_POINT_HPP
