#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "actsub/estimator.hpp"
#include "actsub/io.hpp"
#include "actsub/linalg.hpp"
#include "actsub/models.hpp"

namespace actsub {

/// One-dimensional elliptic two-point boundary value problem
///
///   -(a u')' = 1 on (0,1),  u(0) = 0,  u'(1) = 0,
///
/// with a lognormal coefficient field log a(s) = sum_i x_i gamma_i phi_i(s)
/// truncated after m terms; {gamma_i^2, phi_i} are the leading eigenpairs of
/// the discretized exponential correlation operator exp(-|s-t| / beta). The
/// quantity of interest is the right-boundary value u(1), and its gradient
/// with respect to x comes from a discrete adjoint solve.
///
/// Discretization: n_s equal cells, unknowns at cell centers, fluxes with
/// harmonically averaged interface coefficients (keeps the M-matrix
/// property), half-cell Dirichlet closure on the left, zero flux on the
/// right. The m input variables are standard Gaussian.
class EllipticModel : public Model {
 public:
  std::size_t dimension() const override { return kl_values_.size(); }
  InputDensity density() const override {
    return InputDensity::standard_gaussian(kl_values_.size());
  }

  double correlation_length() const { return beta_; }
  std::size_t grid_size() const { return grid_; }
  /// KL amplitudes gamma_i, descending.
  const Vector& kl_values() const { return kl_values_; }
  /// Columns phi_i at cell centers, orthonormal under the 1/n_s weights.
  const Matrix& kl_modes() const { return kl_modes_; }

  /// Coefficient field a(s) = exp(sum_i x_i gamma_i phi_i(s)) at cell centers.
  Vector coefficient(std::span<const double> x) const {
    check_input(x);
    const std::size_t m = dimension();
    Vector a(grid_, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double scale = x[i] * kl_values_[i];
      if (scale == 0.0) continue;
      for (std::size_t s = 0; s < grid_; ++s) a[s] += scale * kl_modes_(s, i);
    }
    for (double& v : a) v = std::exp(v);
    return a;
  }

  /// Solves the state equation for an explicit coefficient vector; the
  /// core solve used by everything else and by scaling tests.
  Vector solve_with_coefficient(const Vector& a) const {
    if (a.size() != grid_) throw std::invalid_argument("elliptic: coefficient size mismatch");
    for (double v : a)
      if (!(v > 0.0)) throw std::invalid_argument("elliptic: coefficient must be positive");
    auto [sub, diag, sup] = assemble(a);
    const Vector rhs(grid_, 1.0 / static_cast<double>(grid_));
    return solve_tridiagonal(sub, diag, sup, rhs);
  }

  /// Cell-center values of u for inputs x.
  Vector solve_state(std::span<const double> x) const {
    return solve_with_coefficient(coefficient(x));
  }

  /// f(x) = u at the right boundary; with the zero-flux condition there the
  /// boundary value is the last cell value.
  double value(std::span<const double> x) const override {
    const Vector u = solve_state(x);
    return u.back();
  }

  /// Gradient of the discrete quantity of interest via one extra solve
  /// with the (symmetric) system matrix. Sensitivities flow through the
  /// harmonic interface averages and d a / d x_i = a gamma_i phi_i.
  Vector gradient(std::span<const double> x) const override {
    const Vector a = coefficient(x);
    auto [sub, diag, sup] = assemble(a);
    const double dx = 1.0 / static_cast<double>(grid_);
    const Vector rhs(grid_, dx);
    const Vector u = solve_tridiagonal(sub, diag, sup, rhs);
    Vector e(grid_, 0.0);
    e.back() = 1.0;
    const Vector v = solve_tridiagonal(sub, diag, sup, e);

    // t_k = d(v^T M u)/d a_k, assembled from per-interface terms
    Vector t(grid_, 0.0);
    for (std::size_t i = 0; i + 1 < grid_; ++i) {
      const double du = u[i] - u[i + 1];
      const double dv = v[i] - v[i + 1];
      const double w = dv * du / dx;
      const double denom = a[i] + a[i + 1];
      const double dl = 2.0 * (a[i + 1] / denom) * (a[i + 1] / denom);
      const double dr = 2.0 * (a[i] / denom) * (a[i] / denom);
      t[i] += w * dl;
      t[i + 1] += w * dr;
    }
    t[0] += v[0] * u[0] * 2.0 / dx;  // Dirichlet closure carries a_0 directly

    // df/dx_i = -sum_k t_k a_k gamma_i phi_i(s_k)
    const std::size_t m = dimension();
    Vector g(m, 0.0);
    for (std::size_t k = 0; k < grid_; ++k) {
      const double ta = t[k] * a[k];
      if (ta == 0.0) continue;
      for (std::size_t i = 0; i < m; ++i) g[i] -= ta * kl_modes_(k, i);
    }
    for (std::size_t i = 0; i < m; ++i) g[i] *= kl_values_[i];
    return g;
  }

  json describe() const override {
    return {{"kind", "elliptic"}, {"beta", beta_}, {"m", dimension()}, {"grid", grid_}};
  }

  /// Columns (index, gamma).
  void write_kl_spectrum_csv(const std::string& path) const {
    Matrix t(kl_values_.size(), 2);
    for (std::size_t i = 0; i < kl_values_.size(); ++i) {
      t(i, 0) = static_cast<double>(i + 1);
      t(i, 1) = kl_values_[i];
    }
    write_csv_matrix(path, t, {"index", "gamma"});
  }

 private:
  friend EllipticModel build_kl(double beta, std::size_t m, std::size_t grid);
  EllipticModel(double beta, std::size_t grid, Vector values, Matrix modes)
      : beta_(beta), grid_(grid), kl_values_(std::move(values)), kl_modes_(std::move(modes)) {}

  std::tuple<Vector, Vector, Vector> assemble(const Vector& a) const {
    const std::size_t n = grid_;
    const double dx = 1.0 / static_cast<double>(n);
    Vector interface(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      interface[i] = 2.0 * a[i] * a[i + 1] / (a[i] + a[i + 1]);
    Vector sub(n - 1), diag(n), sup(n - 1);
    diag[0] = (2.0 * a[0] + interface[0]) / dx;
    for (std::size_t i = 1; i + 1 < n; ++i) diag[i] = (interface[i - 1] + interface[i]) / dx;
    diag[n - 1] = interface[n - 2] / dx;
    for (std::size_t i = 0; i + 1 < n; ++i) sub[i] = sup[i] = -interface[i] / dx;
    return {std::move(sub), std::move(diag), std::move(sup)};
  }

  double beta_ = 1.0;
  std::size_t grid_ = 0;
  Vector kl_values_;
  Matrix kl_modes_;
};

/// Builds the KL basis by eigendecomposing the correlation matrix
/// K_ij = exp(-|s_i - s_j| / beta) w_j on midpoint nodes with uniform
/// weights w_j = 1/n_s, keeping the top m eigenpairs. Modes are scaled to
/// be orthonormal under the quadrature weights and gamma_i is the square
/// root of the (clamped) eigenvalue.
inline EllipticModel build_kl(double beta, std::size_t m, std::size_t grid) {
  if (!(beta > 0.0)) throw std::invalid_argument("build_kl: beta must be > 0");
  if (m < 2) throw std::invalid_argument("build_kl: m must be >= 2");
  if (grid < 2) throw std::invalid_argument("build_kl: grid must be >= 2");
  if (m > grid)
    throw std::invalid_argument("build_kl: m = " + std::to_string(m) + " exceeds grid = " +
                                std::to_string(grid));
  const double w = 1.0 / static_cast<double>(grid);
  Matrix k(grid, grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double si = (static_cast<double>(i) + 0.5) * w;
    for (std::size_t j = 0; j <= i; ++j) {
      const double sj = (static_cast<double>(j) + 0.5) * w;
      const double v = std::exp(-std::abs(si - sj) / beta) * w;
      k(i, j) = k(j, i) = v;
    }
  }
  auto eig = jacobi_eigendecompose(k);
  Vector values(m);
  Matrix modes(grid, m);
  const double mode_scale = std::sqrt(static_cast<double>(grid));
  for (std::size_t j = 0; j < m; ++j) {
    values[j] = std::sqrt(std::max(eig.values[j], 0.0));
    for (std::size_t i = 0; i < grid; ++i) modes(i, j) = eig.vectors(i, j) * mode_scale;
  }
  apply_sign_convention(modes);
  return EllipticModel(beta, grid, std::move(values), std::move(modes));
}

}  // namespace actsub
