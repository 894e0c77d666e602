// Copyright 2026 The degen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "degen/errors.hpp"

namespace degen {

/// Dense square matrix, row-major. Sized for the (k+1)x(k+1) systems of a
/// local polynomial fit; nothing here is tuned for large dimensions.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static SquareMatrix identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const { return dim_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }
  std::span<const double> data() const { return data_; }

  SquareMatrix& operator+=(const SquareMatrix& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SquareMatrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

inline constexpr std::size_t kMaxJacobiDim = 7;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Sweeps stop once the off-diagonal Frobenius norm is below
/// 1e-15 relative to the matrix norm (well inside the 1e-12 target).
inline std::vector<double> symmetric_eigenvalues(const SquareMatrix& m) {
  const std::size_t n = m.dim();
  if (n > kMaxJacobiDim) throw DomainError("symmetric_eigenvalues: dimension above 7");
  SquareMatrix a = m;
  double total = 0.0;
  for (double v : a.data()) total += v * v;
  const double scale = std::sqrt(total);

  auto off_norm = [&a, n] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep) {
    if (off_norm() <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double smallest_eigenvalue(const SquareMatrix& m) {
  if (m.dim() == 0) throw DomainError("smallest_eigenvalue: empty matrix");
  if (m.dim() == 1) return m(0, 0);
  return symmetric_eigenvalues(m).front();
}

namespace detail {

inline std::vector<double> gauss_partial_pivot(SquareMatrix a, std::vector<double> b) {
  const std::size_t n = a.dim();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw NumericalError("linear solve: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace detail

/// Solves A x = b for symmetric A. Cholesky first; falls back to Gaussian
/// elimination with partial pivoting when a pivot is nonpositive beyond a
/// 1e-14 relative slack.
inline std::vector<double> solve_symmetric(const SquareMatrix& a, std::span<const double> b) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw DomainError("solve_symmetric: dimension mismatch");
  double diag_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(a(i, i)));

  SquareMatrix l(n);
  bool ok = true;
  for (std::size_t j = 0; j < n && ok; ++j) {
    double d = a(j, j);
    for (std::size_t c = 0; c < j; ++c) d -= l(j, c) * l(j, c);
    if (d <= 1e-14 * diag_max) {
      ok = false;
      break;
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t r = j + 1; r < n; ++r) {
      double s = a(r, j);
      for (std::size_t c = 0; c < j; ++c) s -= l(r, c) * l(j, c);
      l(r, j) = s / l(j, j);
    }
  }
  if (!ok) return detail::gauss_partial_pivot(a, std::vector<double>(b.begin(), b.end()));

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t c = 0; c < i; ++c) s -= l(i, c) * y[c];
    y[i] = s / l(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t r = i + 1; r < n; ++r) s -= l(r, i) * x[r];
    x[i] = s / l(i, i);
  }
  return x;
}

}  // namespace degen
