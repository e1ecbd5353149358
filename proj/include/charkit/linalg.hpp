#pragma once

// Small dense complex matrices: rank by row reduction, LU determinant,
// null spaces. Sizes here are at most a few dozen, so everything is plain
// O(n^3) elimination.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "charkit/error.hpp"
#include "charkit/expr.hpp"

namespace charkit {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}
  Matrix(std::initializer_list<std::initializer_list<Complex>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols_) throw PreconditionError("ragged matrix literal");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Complex& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const Complex& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Largest entry modulus.
  double max_abs() const {
    double m = 0.0;
    for (const auto& c : data_) m = std::max(m, std::abs(c));
    return m;
  }

  /// Induced infinity norm (max absolute row sum).
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  Matrix& operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }
  friend Matrix operator*(Complex s, Matrix a) {
    for (auto& c : a.data_) c *= s;
    return a;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw PreconditionError("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        for (int j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  std::vector<Complex> apply(const std::vector<Complex>& v) const {
    if (static_cast<int>(v.size()) != cols_) throw PreconditionError("matrix-vector shape mismatch");
    std::vector<Complex> out(rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

/// Default relative pivot tolerance for numeric rank decisions.
inline constexpr double kRankTolerance = 1e-9;

namespace detail {
// Reduced row echelon form in place with partial pivoting on modulus.
// Pivots below rel_tol * (largest initial entry) count as zero. Returns the
// pivot columns.
inline std::vector<int> rref(Matrix& a, double rel_tol) {
  const double threshold = rel_tol * a.max_abs();
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < a.cols() && row < a.rows(); ++col) {
    int best = row;
    for (int i = row + 1; i < a.rows(); ++i)
      if (std::abs(a(i, col)) > std::abs(a(best, col))) best = i;
    if (std::abs(a(best, col)) <= threshold || threshold == 0.0) continue;
    if (best != row)
      for (int j = 0; j < a.cols(); ++j) std::swap(a(best, j), a(row, j));
    Complex piv = a(row, col);
    for (int j = col; j < a.cols(); ++j) a(row, j) /= piv;
    for (int i = 0; i < a.rows(); ++i) {
      if (i == row) continue;
      Complex f = a(i, col);
      if (f == Complex{}) continue;
      for (int j = col; j < a.cols(); ++j) a(i, j) -= f * a(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline void orthonormalize_rows(std::vector<std::vector<Complex>>& rows) {
  std::vector<std::vector<Complex>> out;
  for (auto v : rows) {
    for (const auto& q : out) {
      Complex dot{};
      for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * std::conj(q[i]);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * q[i];
    }
    double norm = 0.0;
    for (const auto& c : v) norm += std::norm(c);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (auto& c : v) c /= norm;
    out.push_back(std::move(v));
  }
  rows = std::move(out);
}
}  // namespace detail

/// Numeric rank via row reduction with partial pivoting on modulus.
inline int numeric_rank(Matrix a, double rel_tol = kRankTolerance) {
  return static_cast<int>(detail::rref(a, rel_tol).size());
}

/// Determinant by LU with partial pivoting.
inline Complex determinant(Matrix a) {
  if (a.rows() != a.cols()) throw PreconditionError("determinant of a non-square matrix");
  const int n = a.rows();
  Complex det(1.0, 0.0);
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(best, col))) best = i;
    if (a(best, col) == Complex{}) return {};
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(a(best, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (int i = col + 1; i < n; ++i) {
      Complex f = a(i, col) / a(col, col);
      for (int j = col; j < n; ++j) a(i, j) -= f * a(col, j);
    }
  }
  return det;
}

/// Orthonormal basis (as rows) of {v : A v = 0}.
inline Matrix null_space(const Matrix& a, double rel_tol = kRankTolerance) {
  Matrix r = a;
  auto pivots = detail::rref(r, rel_tol);
  std::vector<bool> is_pivot(a.cols(), false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<std::vector<Complex>> basis;
  for (int free = 0; free < a.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Complex> v(a.cols());
    v[free] = 1.0;
    for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -r(static_cast<int>(k), free);
    basis.push_back(std::move(v));
  }
  detail::orthonormalize_rows(basis);
  Matrix out(static_cast<int>(basis.size()), a.cols());
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = basis[i][j];
  return out;
}

/// Rows M with M A = 0, orthonormal; q = m - rank(A) rows (possibly none).
/// For a symbol matrix these rows give the compatibility conditions on
/// Cauchy data along a characteristic surface.
inline Matrix left_null_space(const Matrix& a, double rel_tol = kRankTolerance) {
  return null_space(a.transpose(), rel_tol);
}

/// Inverse by Gauss-Jordan; throws if singular to rel_tol.
inline Matrix inverse(const Matrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) throw PreconditionError("inverse of a non-square matrix");
  const int n = a.rows();
  Matrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1.0;
  }
  Matrix left = a;
  if (numeric_rank(left, rel_tol) < n) throw PreconditionError("matrix is singular");
  detail::rref(aug, 1e-300);
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = aug(i, n + j);
  return out;
}

}  // namespace charkit
