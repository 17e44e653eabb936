#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "actsub/io.hpp"
#include "actsub/linalg.hpp"
#include "actsub/sampling.hpp"

namespace actsub {

/// Fixes eigenvector signs: the entry of largest magnitude is made
/// positive, ties broken by lowest row index. The underlying problem
/// leaves signs free; a convention keeps bootstrap comparisons and
/// emitted files deterministic.
inline void apply_sign_convention(Matrix& w) {
  for (std::size_t j = 0; j < w.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double mag = std::abs(w(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (w(arg, j) < 0.0)
      for (std::size_t i = 0; i < w.rows(); ++i) w(i, j) = -w(i, j);
  }
}

/// Monte Carlo estimate of C plus its eigendecomposition. Invariants:
/// eigenvalues descending and >= 0 (tiny negatives clamped), W orthogonal,
/// residual ||C - W L W^T|| <= 1e-10 max(1, lambda_1).
struct ActiveSubspaceEstimate {
  Matrix c_hat;
  Vector eigenvalues;
  Matrix eigenvectors;  // columns, order matching eigenvalues
  std::optional<std::size_t> active_dimension;
  json provenance;

  std::size_t input_dimension() const { return eigenvalues.size(); }

  json to_json() const {
    json w = json::array();
    for (std::size_t i = 0; i < eigenvectors.rows(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < eigenvectors.cols(); ++j) row.push_back(eigenvectors(i, j));
      w.push_back(std::move(row));
    }
    json j{{"schema_version", 1},
           {"eigenvalues", eigenvalues},
           {"W", std::move(w)},
           {"provenance", provenance}};
    j["n"] = active_dimension ? json(*active_dimension) : json(nullptr);
    return j;
  }

  /// Columns (index, lambda); plot-ready.
  void write_eigenvalues_csv(const std::string& path) const {
    Matrix t(eigenvalues.size(), 2);
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
      t(i, 0) = static_cast<double>(i + 1);
      t(i, 1) = eigenvalues[i];
    }
    write_csv_matrix(path, t, {"index", "lambda"});
  }
};

/// C_hat = (1/N) sum_j grad_j grad_j^T.
inline Matrix estimate_C(const GradientSampleSet& samples) {
  samples.validate();
  const std::size_t n = samples.count(), m = samples.dimension();
  Matrix c(m, m);
  for (std::size_t j = 0; j < n; ++j) {
    auto g = samples.gradients.row(j);
    for (std::size_t r = 0; r < m; ++r) {
      const double gr = g[r];
      auto crow = c.row(r);
      for (std::size_t s = 0; s < m; ++s) crow[s] += gr * g[s];
    }
  }
  for (double& v : c.data()) v /= static_cast<double>(n);
  return c;
}

/// Eigendecomposition of an estimated C matrix: descending eigenvalues
/// with roundoff negatives (>= -1e-12 lambda_1) clamped to zero, and
/// sign-fixed eigenvectors. Rejects inputs that are asymmetric beyond
/// 1e-10 relative or genuinely indefinite.
inline std::pair<Vector, Matrix> eigendecompose(const Matrix& c_hat) {
  if (c_hat.rows() != c_hat.cols()) throw std::invalid_argument("eigendecompose: not square");
  const double scale = std::max(max_abs(c_hat), 1e-300);
  if (asymmetry_max_abs(c_hat) > 1e-10 * scale)
    throw std::invalid_argument("eigendecompose: matrix asymmetric beyond 1e-10 relative");
  auto eig = jacobi_eigendecompose(c_hat);
  const double lead = std::max(eig.values.front(), 0.0);
  for (double& v : eig.values) {
    if (v < 0.0) {
      if (v < -1e-12 * std::max(lead, 1e-300))
        throw std::invalid_argument(
            "eigendecompose: negative eigenvalue beyond the PSD roundoff tolerance");
      v = 0.0;
    }
  }
  apply_sign_convention(eig.vectors);
  return {std::move(eig.values), std::move(eig.vectors)};
}

inline ActiveSubspaceEstimate make_estimate(const GradientSampleSet& samples) {
  ActiveSubspaceEstimate est;
  est.c_hat = estimate_C(samples);
  auto [values, vectors] = eigendecompose(est.c_hat);
  est.eigenvalues = std::move(values);
  est.eigenvectors = std::move(vectors);
  est.provenance = samples.provenance();
  return est;
}

/// Same eigenpairs through the SVD of B = N^-1/2 [grad_1 ... grad_N]:
/// eigenvalues are the squared singular values and W the left singular
/// vectors. Algebraically equivalent to the eigendecomposition route but
/// computed by one-sided Jacobi on the sample matrix, never forming C.
inline std::pair<Vector, Matrix> estimate_via_svd(const GradientSampleSet& samples) {
  samples.validate();
  const std::size_t n = samples.count(), m = samples.dimension();
  // rows of `scaled` are gradients / sqrt(N); its columns span the range of C
  Matrix scaled = samples.gradients;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : scaled.data()) v *= inv_sqrt_n;
  Svd svd = one_sided_jacobi_svd(scaled);
  Vector eigenvalues(m);
  for (std::size_t i = 0; i < m; ++i)
    eigenvalues[i] = svd.singular_values[i] * svd.singular_values[i];
  apply_sign_convention(svd.right_vectors);
  return {std::move(eigenvalues), std::move(svd.right_vectors)};
}

struct SubspacePartition {
  Matrix active_basis;     // W1, m x n
  Matrix inactive_basis;   // W2, m x (m-n)
  Vector active_values;    // Lambda1
  Vector inactive_values;  // Lambda2
};

inline SubspacePartition partition(const ActiveSubspaceEstimate& estimate, std::size_t n) {
  const std::size_t m = estimate.input_dimension();
  if (n < 1 || n >= m)
    throw std::invalid_argument("partition: need 1 <= n < m, got n = " + std::to_string(n));
  SubspacePartition p;
  p.active_basis = Matrix(m, n);
  p.inactive_basis = Matrix(m, m - n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) p.active_basis(i, j) = estimate.eigenvectors(i, j);
    for (std::size_t j = n; j < m; ++j)
      p.inactive_basis(i, j - n) = estimate.eigenvectors(i, j);
  }
  p.active_values.assign(estimate.eigenvalues.begin(), estimate.eigenvalues.begin() + n);
  p.inactive_values.assign(estimate.eigenvalues.begin() + n, estimate.eigenvalues.end());
  return p;
}

namespace detail {
inline void check_orthonormal(const Matrix& w, const char* name) {
  for (std::size_t a = 0; a < w.cols(); ++a)
    for (std::size_t b = a; b < w.cols(); ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < w.rows(); ++i) g += w(i, a) * w(i, b);
      const double target = a == b ? 1.0 : 0.0;
      if (std::abs(g - target) > 1e-8)
        throw std::invalid_argument(std::string("subspace_distance: ") + name +
                                    " is not column-orthonormal (1e-8)");
    }
}
}  // namespace detail

/// Distance between equal-dimension subspaces: the sine of the largest
/// principal angle, equal to ||W1 W1^T - V1 V1^T|| and to ||W1^T V2||.
/// Computed as the largest singular value of the residual
/// (I - V1 V1^T) W1, whose entries are already O(sin), so tiny distances
/// come out at full precision (1 - sigma_min^2 would cancel them away).
inline double subspace_distance(const Matrix& w1, const Matrix& v1) {
  if (w1.rows() != v1.rows() || w1.cols() != v1.cols())
    throw std::invalid_argument("subspace_distance: shapes differ");
  if (w1.cols() < 1 || w1.cols() > w1.rows())
    throw std::invalid_argument("subspace_distance: need 1 <= n <= m columns");
  detail::check_orthonormal(w1, "first argument");
  detail::check_orthonormal(v1, "second argument");
  if (w1 == v1) return 0.0;  // bit-identical bases, e.g. degenerate resamples
  const std::size_t m = w1.rows(), n = w1.cols();
  const Matrix cross = matmul(v1.transposed(), w1);  // n x n
  Matrix residual = w1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += v1(i, k) * cross(k, j);
      residual(i, j) -= acc;
    }
  const Svd svd = one_sided_jacobi_svd(residual);
  return std::min(svd.singular_values.front(), 1.0);
}

/// Reference route for the same distance: spectral norm of the projector
/// difference W1 W1^T - V1 V1^T. O(m^3); used to cross-check the fast
/// route in tests.
inline double subspace_distance_projector(const Matrix& w1, const Matrix& v1) {
  if (w1.rows() != v1.rows() || w1.cols() != v1.cols())
    throw std::invalid_argument("subspace_distance: shapes differ");
  detail::check_orthonormal(w1, "first argument");
  detail::check_orthonormal(v1, "second argument");
  const std::size_t m = w1.rows();
  Matrix diff(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double pij = 0.0;
      for (std::size_t k = 0; k < w1.cols(); ++k)
        pij += w1(i, k) * w1(j, k) - v1(i, k) * v1(j, k);
      diff(i, j) = pij;
    }
  return std::min(symmetric_spectral_norm(diff), 1.0);
}

/// y = W1^T x, z = W2^T x.
inline std::pair<Vector, Vector> project_active(std::span<const double> x, const Matrix& w1,
                                                const Matrix& w2) {
  if (w1.rows() != x.size() || w2.rows() != x.size() || w1.cols() + w2.cols() != x.size())
    throw std::invalid_argument("project_active: shape mismatch");
  return {matvec(w1.transposed(), x), matvec(w2.transposed(), x)};
}

/// (1/N) sum_j ((grad_j)^T w)^2 for a unit direction w; the sample
/// version of the mean-squared directional derivative, equal to w^T C w.
inline double mean_squared_directional_derivative(const GradientSampleSet& samples,
                                                  std::span<const double> w) {
  samples.validate();
  if (w.size() != samples.dimension())
    throw std::invalid_argument("directional derivative: dimension mismatch");
  if (std::abs(norm2(w) - 1.0) > 1e-10)
    throw std::invalid_argument("directional derivative: w must be a unit vector (1e-10)");
  double acc = 0.0;
  for (std::size_t j = 0; j < samples.count(); ++j) {
    const double d = dot(samples.gradients.row(j), w);
    acc += d * d;
  }
  return acc / static_cast<double>(samples.count());
}

}  // namespace actsub
