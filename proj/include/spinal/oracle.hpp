#pragma once

// Dense reference linear algebra: one-sided cyclic Jacobi eigensolver for symmetric
// matrices and a pivoted LU determinant reported as sign and log-magnitude.
// Everything closed-form in the library is checked against these routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinal/algebra.hpp"

namespace spinal {

inline constexpr std::size_t default_dense_budget = 4096;

/// Row-major square matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t order, double fill = 0.0) : n_(order), a_(order * order, fill) {}

  static DenseMatrix identity(std::size_t order) {
    DenseMatrix m(order);
    for (std::size_t i = 0; i < order; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t order() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const double> data() const { return a_; }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  DenseMatrix& operator*=(double s) {
    for (auto& x : a_) x *= s;
    return *this;
  }
  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    a.check_same(b);
    DenseMatrix c(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  /// this + s * I
  DenseMatrix shifted(double s) const {
    DenseMatrix c = *this;
    for (std::size_t i = 0; i < n_; ++i) c(i, i) += s;
    return c;
  }

  double max_abs_diff(const DenseMatrix& o) const {
    check_same(o);
    double r = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) r = std::max(r, std::abs(a_[i] - o.a_[i]));
    return r;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  std::vector<double> multiply(std::span<const double> x) const {
    if (x.size() != n_) throw std::invalid_argument("matrix-vector length mismatch");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

private:
  void check_same(const DenseMatrix& o) const {
    if (n_ != o.n_) throw std::invalid_argument("matrix order mismatch");
  }

  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// A dense matrix whose symmetry was verified (and then enforced exactly).
class DenseSymmetricMatrix {
public:
  DenseSymmetricMatrix() = default;

  explicit DenseSymmetricMatrix(DenseMatrix m, double tol = 1e-14) : m_(std::move(m)) {
    const double scale = std::max(1.0, m_.frobenius_norm());
    for (std::size_t i = 0; i < m_.order(); ++i)
      for (std::size_t j = i + 1; j < m_.order(); ++j) {
        if (std::abs(m_(i, j) - m_(j, i)) > tol * scale)
          throw std::invalid_argument("matrix is not symmetric at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
        const double avg = 0.5 * (m_(i, j) + m_(j, i));
        m_(i, j) = m_(j, i) = avg;
      }
  }

  std::size_t order() const { return m_.order(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const DenseMatrix& matrix() const { return m_; }

private:
  DenseMatrix m_;
};

/// Raised when Jacobi sweeps fail to reduce the off-diagonal mass.
class convergence_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Eigensystem {
  std::vector<double> values;               // ascending
  std::vector<std::vector<double>> vectors;  // vectors[j] belongs to values[j]; empty if not requested
};

namespace detail {

inline Eigensystem jacobi(const DenseSymmetricMatrix& mat, double tol, bool want_vectors, int max_sweeps,
                          std::size_t budget) {
  const std::size_t n = mat.order();
  if (n > budget) throw budget_error("matrix order " + std::to_string(n) + " exceeds dense budget");
  // G = A + cI is positive definite, so its singular values are the eigenvalues
  // of A shifted by c and its left and right singular vectors coincide.
  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(mat(i, j));
    radius = std::max(radius, r);
  }
  const double shift = radius + 1.0;
  DenseMatrix g = mat.matrix();
  for (std::size_t i = 0; i < n; ++i) g(i, i) += shift;

  // one-sided rotations on rows until all pairs are orthogonal to working precision
  const double threshold = std::max(tol, 2.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(n)));
  std::vector<double> norm2(n);
  auto row_dot = [&](std::size_t i, std::size_t j) {
    const double* a = &g(i, 0);
    const double* b = &g(j, 0);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };
  int sweep = 0;
  bool rotated = true;
  for (; sweep < max_sweeps && rotated; ++sweep) {
    rotated = false;
    for (std::size_t i = 0; i < n; ++i) norm2[i] = row_dot(i, i);
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norm2[p], beta = norm2[q];
        const double gamma = row_dot(p, q);
        if (std::abs(gamma) <= threshold * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(zeta * zeta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        double* rp = &g(p, 0);
        double* rq = &g(q, 0);
        for (std::size_t k = 0; k < n; ++k) {
          const double xp = rp[k], xq = rq[k];
          rp[k] = c * xp - s * xq;
          rq[k] = s * xp + c * xq;
        }
        norm2[p] = alpha - t * gamma;
        norm2[q] = beta + t * gamma;
      }
    }
  }
  if (rotated) throw convergence_error("Jacobi did not converge after " + std::to_string(max_sweeps) + " sweeps");

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = std::sqrt(row_dot(i, i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sigma[i] < sigma[j]; });
  Eigensystem es;
  es.values.reserve(n);
  for (std::size_t i : order) es.values.push_back(sigma[i] - shift);
  if (want_vectors) {
    es.vectors.reserve(n);
    for (std::size_t i : order) {
      std::vector<double> row(&g(i, 0), &g(i, 0) + n);
      for (auto& x : row) x /= sigma[i];
      es.vectors.push_back(std::move(row));
    }
  }
  return es;
}

}  // namespace detail

/// All eigenvalues, ascending, by one-sided cyclic Jacobi rotations on
/// mat + cI until every pair of rows has cosine at most
/// max(tol, 2 eps sqrt(n)).
inline std::vector<double> symmetric_eigenvalues(const DenseSymmetricMatrix& mat, double tol = 1e-15,
                                                 std::size_t budget = default_dense_budget) {
  return detail::jacobi(mat, tol, false, 100, budget).values;
}

/// Eigenvalues with the normalized rotated rows as eigenvectors.
inline Eigensystem symmetric_eigensystem(const DenseSymmetricMatrix& mat, double tol = 1e-15,
                                         std::size_t budget = default_dense_budget) {
  return detail::jacobi(mat, tol, true, 100, budget);
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// remaining norm falls below tol times their original norm are dropped.
/// Returns the orthonormal basis of the span.
inline std::vector<std::vector<double>> orthonormal_basis(const std::vector<std::vector<double>>& vectors,
                                                          double tol = 1e-12) {
  std::vector<std::vector<double>> q;
  for (const auto& v : vectors) {
    std::vector<double> w = v;
    const double n0 = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) {
        if (u.size() != w.size()) throw std::invalid_argument("vectors differ in length");
        const double c = std::inner_product(u.begin(), u.end(), w.begin(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * u[i];
      }
    const double n1 = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (n1 <= tol * n0) continue;
    for (auto& x : w) x /= n1;
    q.push_back(std::move(w));
  }
  return q;
}

/// Dimension of the span, dropping directions below tol (relative).
inline std::size_t numerical_rank(const std::vector<std::vector<double>>& vectors, double tol = 1e-8) {
  return orthonormal_basis(vectors, tol).size();
}

/// Determinant as sign * exp(log_abs); sign 0 marks a singular matrix.
struct SignedLog {
  int sign = 1;
  double log_abs = 0.0;

  static SignedLog zero() { return {0, -std::numeric_limits<double>::infinity()}; }
  static SignedLog of(double x) {
    if (x == 0.0) return zero();
    return {x > 0 ? 1 : -1, std::log(std::abs(x))};
  }

  SignedLog& operator*=(const SignedLog& o) {
    sign *= o.sign;
    log_abs = sign == 0 ? -std::numeric_limits<double>::infinity() : log_abs + o.log_abs;
    return *this;
  }

  /// x^e for a factor x given directly.
  SignedLog& multiply_power(double x, std::uint64_t e) {
    if (e == 0) return *this;
    if (x == 0.0) return *this = zero();
    if (x < 0 && (e % 2 == 1)) sign = -sign;
    log_abs += static_cast<double>(e) * std::log(std::abs(x));
    return *this;
  }

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

/// Gaussian elimination with partial pivoting; pivots at rounding level
/// (4 n eps max|a_ij|, at least 1e-300) count as zero.
inline SignedLog determinant(const DenseMatrix& mat, std::size_t budget = default_dense_budget) {
  const std::size_t n = mat.order();
  if (n > budget) throw budget_error("matrix order " + std::to_string(n) + " exceeds dense budget");
  DenseMatrix a = mat;
  SignedLog det;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(mat(i, j)));
  // pivots at rounding level relative to the entries count as exact zeros
  const double tiny = std::max(1e-300, 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) <= tiny) return SignedLog::zero();
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
      det.sign = -det.sign;
    }
    const double p = a(col, col);
    det.multiply_power(p, 1);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / p;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a(r, k) -= f * a(col, k);
    }
  }
  return det;
}

inline SignedLog determinant(const DenseSymmetricMatrix& mat, std::size_t budget = default_dense_budget) {
  return determinant(mat.matrix(), budget);
}

}  // namespace spinal
