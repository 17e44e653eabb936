#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace actsub {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Sized for desk-scale problems
/// (m up to a few thousand); no view/expression machinery.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector col(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s = std::max(s, std::abs(v));
  return s;
}

inline double asymmetry_max_abs(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      s = std::max(s, std::abs(a(i, j) - a(j, i)));
  return s;
}

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // columns, same order as values
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Accurate and simple;
/// adequate for the m <= ~1000 range this library targets. Input is
/// symmetrized internally; eigenvalues come back sorted descending.
///
/// Rotations fire on the relative criterion |a_pq| > tol sqrt(|a_pp a_qq|),
/// which preserves high relative accuracy of small eigenvalues on positive
/// definite input instead of only absolute accuracy at the matrix scale.
inline SymmetricEigen jacobi_eigendecompose(const Matrix& a_in, std::size_t max_sweeps = 100,
                                            double tol = 1e-15) {
  if (a_in.rows() != a_in.cols()) throw std::invalid_argument("jacobi: matrix not square");
  const std::size_t n = a_in.rows();
  Matrix a = a_in;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = avg;
    }
  // vt holds eigenvectors as rows so rotation updates stay contiguous.
  Matrix vt = Matrix::identity(n);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        if (std::abs(apq) <= tol * std::sqrt(std::abs(app) * std::abs(aqq))) continue;
        rotated = true;
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        auto rp = a.row(p), rq = a.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = rp[i], aiq = rq[i];
          rp[i] = c * aip - s * aiq;
          rq[i] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(i, p), aqi = a(i, q);
          a(i, p) = c * api - s * aqi;
          a(i, q) = s * api + c * aqi;
        }
        a(p, q) = a(q, p) = 0.0;
        auto vp = vt.row(p), vq = vt.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = vp[i], viq = vq[i];
          vp[i] = c * vip - s * viq;
          vq[i] = s * vip + c * viq;
        }
      }
    }
    if (!rotated) break;
    if (sweep + 1 == max_sweeps) throw std::runtime_error("jacobi: no convergence");
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return out.values[i] > out.values[j]; });
  Vector sorted(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = out.values[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = vt(order[k], i);
  }
  out.values = std::move(sorted);
  return out;
}

struct Svd {
  Vector singular_values;  // descending, length = cols of input
  Matrix right_vectors;    // V, cols x cols; input*V has orthogonal columns
};

/// One-sided Jacobi SVD: orthogonalizes the columns of `a` by right
/// rotations. Works for any aspect ratio, including rank-deficient input
/// (zero columns simply stay zero). Returns singular values and V with
/// a = U diag(sigma) V^T.
inline Svd one_sided_jacobi_svd(const Matrix& a_in, std::size_t max_sweeps = 64) {
  Matrix a = a_in;
  const std::size_t rows = a.rows(), n = a.cols();
  Matrix vt = Matrix::identity(n);  // rows are columns of V

  const double eps = 1e-15;
  // columns this small hold only roundoff; rotating them chases noise
  const double zero2 = std::pow(4e-16 * frobenius_norm(a), 2);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double dpp = 0.0, dqq = 0.0, dpq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          const double xp = a(i, p), xq = a(i, q);
          dpp += xp * xp;
          dqq += xq * xq;
          dpq += xp * xq;
        }
        if (dpp <= zero2 || dqq <= zero2) continue;
        if (std::abs(dpq) <= eps * std::sqrt(dpp * dqq) || dpq == 0.0) continue;
        rotated = true;
        const double theta = 0.5 * (dqq - dpp) / dpq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < rows; ++i) {
          const double xp = a(i, p), xq = a(i, q);
          a(i, p) = c * xp - s * xq;
          a(i, q) = s * xp + c * xq;
        }
        auto vp = vt.row(p), vq = vt.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = vp[i], xq = vq[i];
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
    if (sweep + 1 == max_sweeps) throw std::runtime_error("one-sided jacobi: no convergence");
  }

  Svd out;
  out.singular_values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
    out.singular_values[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return out.singular_values[i] > out.singular_values[j];
  });
  Vector sorted(n);
  out.right_vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = out.singular_values[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.right_vectors(i, k) = vt(order[k], i);
  }
  out.singular_values = std::move(sorted);
  return out;
}

/// Orthonormalizes the columns of `a` by modified Gram-Schmidt with one
/// reorthogonalization pass. Columns must be linearly independent.
/// The sign of each column is fixed so the R diagonal is positive.
inline Matrix orthonormalize_columns(const Matrix& a) {
  Matrix q = a;
  const std::size_t rows = q.rows(), n = q.cols();
  if (n > rows) throw std::invalid_argument("orthonormalize: more columns than rows");
  for (std::size_t j = 0; j < n; ++j) {
    Vector v = q.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < rows; ++i) proj += q(i, k) * v[i];
        for (std::size_t i = 0; i < rows; ++i) v[i] -= proj * q(i, k);
      }
    }
    const double nrm = norm2(v);
    if (nrm <= 1e-12 * std::max(1.0, norm2(a.col(j))))
      throw std::invalid_argument("orthonormalize: columns linearly dependent");
    for (std::size_t i = 0; i < rows; ++i) q(i, j) = v[i] / nrm;
  }
  // deterministic sign: diag of R = Q^T A positive
  for (std::size_t j = 0; j < n; ++j) {
    double rjj = 0.0;
    for (std::size_t i = 0; i < rows; ++i) rjj += q(i, j) * a(i, j);
    if (rjj < 0.0)
      for (std::size_t i = 0; i < rows; ++i) q(i, j) = -q(i, j);
  }
  return q;
}

/// Thomas algorithm for a tridiagonal system; `sub` and `sup` have length
/// n-1. The systems assembled in this library are diagonally dominant
/// M-matrices, so no pivoting is needed.
inline Vector solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                std::span<const double> sup, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() + 1 != n || sup.size() + 1 != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: inconsistent sizes");
  Vector c(n > 0 ? n - 1 : 0), d(n), u(n);
  double m = diag[0];
  if (m == 0.0) throw std::runtime_error("solve_tridiagonal: singular system");
  if (n > 1) c[0] = sup[0] / m;
  d[0] = rhs[0] / m;
  for (std::size_t i = 1; i < n; ++i) {
    m = diag[i] - sub[i - 1] * c[i - 1];
    if (m == 0.0) throw std::runtime_error("solve_tridiagonal: singular system");
    if (i < n - 1) c[i] = sup[i] / m;
    d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
  }
  u[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u[i] = d[i] - c[i] * u[i + 1];
  return u;
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
inline double symmetric_spectral_norm(const Matrix& a) {
  auto eig = jacobi_eigendecompose(a);
  double s = 0.0;
  for (double v : eig.values) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace actsub
