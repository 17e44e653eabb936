#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "actsub/linalg.hpp"
#include "actsub/rng.hpp"

namespace actsub {

using json = nlohmann::json;

enum class DensityKind { UniformHypercube, StandardGaussian };

/// Input weight function rho: uniform on [-1,1]^m or standard Gaussian
/// on R^m. Estimation targets m > 1; plain sampling also accepts m = 1.
struct InputDensity {
  DensityKind kind = DensityKind::UniformHypercube;
  std::size_t dimension = 0;

  InputDensity() = default;
  InputDensity(DensityKind k, std::size_t m) : kind(k), dimension(m) {
    if (m < 1) throw std::invalid_argument("InputDensity: dimension must be >= 1");
  }
  static InputDensity uniform_hypercube(std::size_t m) {
    return {DensityKind::UniformHypercube, m};
  }
  static InputDensity standard_gaussian(std::size_t m) {
    return {DensityKind::StandardGaussian, m};
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dimension) return false;
    if (kind == DensityKind::UniformHypercube)
      for (double v : x)
        if (!(v >= -1.0 && v <= 1.0)) return false;
    return true;
  }

  json to_json() const {
    return {{"kind", kind == DensityKind::UniformHypercube ? "uniform_hypercube"
                                                           : "standard_gaussian"},
            {"dimension", dimension}};
  }
  static InputDensity from_json(const json& j) {
    const std::string kind = j.at("kind");
    const std::size_t m = j.at("dimension");
    if (kind == "uniform_hypercube") return uniform_hypercube(m);
    if (kind == "standard_gaussian") return standard_gaussian(m);
    throw std::invalid_argument("InputDensity: unknown kind '" + kind + "'");
  }
};

/// How gradient rows were produced. External marks rows imported from a
/// CSV whose provenance we do not control.
struct GradientSource {
  enum class Kind { Exact, ForwardDifference, External };
  Kind kind = Kind::Exact;
  double step = 0.0;

  static GradientSource exact() { return {Kind::Exact, 0.0}; }
  static GradientSource forward_difference(double h) {
    if (!(h > 0.0)) throw std::invalid_argument("GradientSource: step h must be > 0");
    return {Kind::ForwardDifference, h};
  }
  static GradientSource external() { return {Kind::External, 0.0}; }

  json to_json() const {
    switch (kind) {
      case Kind::Exact: return {{"kind", "exact"}};
      case Kind::ForwardDifference: return {{"kind", "forward_difference"}, {"h", step}};
      case Kind::External: return {{"kind", "external"}};
    }
    throw std::logic_error("unreachable");
  }
  static GradientSource from_json(const json& j) {
    const std::string kind = j.at("kind");
    if (kind == "exact") return exact();
    if (kind == "forward_difference") return forward_difference(j.at("h"));
    if (kind == "external") return external();
    throw std::invalid_argument("GradientSource: unknown kind '" + kind + "'");
  }
};

/// A differentiable test function with a declared input density and a
/// closed-form gradient. Implementations must be pure: evaluation never
/// mutates the model, so concurrent calls are safe.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t dimension() const = 0;
  virtual InputDensity density() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual Vector gradient(std::span<const double> x) const = 0;

  /// Closed-form C = E[grad grad^T] when the model admits one.
  virtual bool has_analytic_C() const { return false; }
  virtual Matrix analytic_C() const {
    throw std::logic_error("model has no analytic C matrix");
  }

  virtual json describe() const = 0;

 protected:
  void check_input(std::span<const double> x) const {
    if (x.size() != dimension())
      throw std::invalid_argument("model expects dimension " + std::to_string(dimension()) +
                                  ", got " + std::to_string(x.size()));
    if (!density().contains(x))
      throw std::domain_error("input lies outside the [-1,1]^m support");
  }
};

/// f(x) = x^T A x / 2 with symmetric positive definite A on the uniform
/// hypercube. When built from a seeded eigenvalue profile the model also
/// carries its ground-truth eigenpairs.
class QuadraticModel : public Model {
 public:
  explicit QuadraticModel(Matrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols() || a_.rows() < 2)
      throw std::invalid_argument("QuadraticModel: A must be square with m >= 2");
    const double scale = std::max(max_abs(a_), 1e-300);
    if (asymmetry_max_abs(a_) > 1e-12 * scale)
      throw std::invalid_argument("QuadraticModel: A is not symmetric (1e-12 relative)");
    for (std::size_t i = 0; i < a_.rows(); ++i)
      for (std::size_t j = i + 1; j < a_.cols(); ++j) {
        const double avg = 0.5 * (a_(i, j) + a_(j, i));
        a_(i, j) = a_(j, i) = avg;
      }
    auto eig = jacobi_eigendecompose(a_);
    if (eig.values.back() <= 0.0)
      throw std::invalid_argument("QuadraticModel: A must be positive definite");
  }

  std::size_t dimension() const override { return a_.rows(); }
  InputDensity density() const override {
    return InputDensity::uniform_hypercube(a_.rows());
  }

  double value(std::span<const double> x) const override {
    check_input(x);
    return 0.5 * dot(x, matvec(a_, x));
  }

  Vector gradient(std::span<const double> x) const override {
    check_input(x);
    return matvec(a_, x);
  }

  /// The quadratic form itself, defined on all of R^m. Large
  /// finite-difference probes from points near the +1 face land beyond
  /// the sampling box, where the polynomial still evaluates; the
  /// benchmark experiments at coarse steps rely on this.
  double value_extended(std::span<const double> x) const {
    if (x.size() != a_.rows())
      throw std::invalid_argument("quadratic form: dimension mismatch");
    return 0.5 * dot(x, matvec(a_, x));
  }

  bool has_analytic_C() const override { return true; }

  /// C = A^2 / 3: the uniform density on [-1,1]^m has E[x x^T] = I/3.
  Matrix analytic_C() const override {
    Matrix c = matmul(a_, a_);
    for (double& v : c.data()) v /= 3.0;
    return c;
  }

  const Matrix& matrix() const { return a_; }

  /// Ground truth from the seeded construction: eigenvalues of A
  /// (descending) and the shared eigenvector basis.
  bool has_ground_truth() const { return truth_.has_value(); }
  const Vector& true_a_eigenvalues() const { return truth_ref().first; }
  const Matrix& true_eigenvectors() const { return truth_ref().second; }

  json describe() const override {
    json j{{"kind", "quadratic"}, {"m", a_.rows()}};
    if (case_id_ > 0) {
      j["case"] = case_id_;
      j["seed"] = seed_;
    }
    return j;
  }

 private:
  friend QuadraticModel build_quadratic_case(int case_id, std::size_t m, std::int64_t seed);
  const std::pair<Vector, Matrix>& truth_ref() const {
    if (!truth_) throw std::logic_error("QuadraticModel: no ground truth recorded");
    return *truth_;
  }

  Matrix a_;
  std::optional<std::pair<Vector, Matrix>> truth_;
  int case_id_ = 0;
  std::int64_t seed_ = 0;
};

/// Eigenvalue profiles for the three benchmark cases: a constant-rate
/// exponential decay a_i = 10^-(i-1)/2, with a factor-10 gap widening
/// inserted after the first (case 2) or third (case 3) eigenvalue.
inline Vector quadratic_case_profile(int case_id, std::size_t m) {
  if (m < 4) throw std::invalid_argument("quadratic case: m must be >= 4");
  if (case_id < 1 || case_id > 3) throw std::invalid_argument("quadratic case must be 1, 2, or 3");
  Vector a(m);
  for (std::size_t i = 0; i < m; ++i) a[i] = std::pow(10.0, -0.5 * static_cast<double>(i));
  if (case_id == 2) a[0] *= 10.0;
  if (case_id == 3)
    for (std::size_t i = 0; i < 3; ++i) a[i] *= 10.0;
  return a;
}

/// Builds A = Q diag(a) Q^T where Q orthogonalizes a seeded matrix of
/// standard normals. All three cases share Q for a given seed.
inline QuadraticModel build_quadratic_case(int case_id, std::size_t m, std::int64_t seed) {
  const Vector a = quadratic_case_profile(case_id, m);
  RngStream rng(seed, stream_id::kOrthogonalBasis);
  Matrix raw(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) raw(i, j) = rng.gaussian();
  Matrix q = orthonormalize_columns(raw);

  Matrix qa(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) qa(i, j) = q(i, j) * a[j];
  Matrix mat = matmul(qa, q.transposed());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double avg = 0.5 * (mat(i, j) + mat(j, i));
      mat(i, j) = mat(j, i) = avg;
    }

  QuadraticModel model(std::move(mat));
  model.truth_ = std::make_pair(a, q);
  model.case_id_ = case_id;
  model.seed_ = seed;
  return model;
}

/// Ridge function f(x) = h(A^T x): the C matrix has rank at most k and its
/// range lies in the range of A.
class IndexModel : public Model {
 public:
  using Link = std::function<double(std::span<const double>)>;
  using LinkGradient = std::function<Vector(std::span<const double>)>;

  IndexModel(Matrix a, Link link, LinkGradient link_gradient,
             DensityKind density_kind = DensityKind::UniformHypercube)
      : a_(std::move(a)),
        link_(std::move(link)),
        link_gradient_(std::move(link_gradient)),
        density_kind_(density_kind) {
    if (a_.cols() > a_.rows())
      throw std::invalid_argument("IndexModel: requires k <= m");
    if (a_.rows() < 2) throw std::invalid_argument("IndexModel: requires m >= 2");
    orthonormalize_columns(a_);  // throws if columns are dependent
  }

  std::size_t dimension() const override { return a_.rows(); }
  InputDensity density() const override { return {density_kind_, a_.rows()}; }

  double value(std::span<const double> x) const override {
    check_input(x);
    return link_(reduced(x));
  }

  Vector gradient(std::span<const double> x) const override {
    check_input(x);
    const Vector hg = link_gradient_(reduced(x));
    if (hg.size() != a_.cols()) throw std::logic_error("IndexModel: link gradient has wrong size");
    Vector g(a_.rows(), 0.0);
    for (std::size_t i = 0; i < a_.rows(); ++i)
      for (std::size_t j = 0; j < a_.cols(); ++j) g[i] += a_(i, j) * hg[j];
    return g;
  }

  json describe() const override { return {{"kind", "index"}, {"m", a_.rows()}, {"k", a_.cols()}}; }

 private:
  Vector reduced(std::span<const double> x) const {
    Vector y(a_.cols(), 0.0);
    for (std::size_t i = 0; i < a_.rows(); ++i)
      for (std::size_t j = 0; j < a_.cols(); ++j) y[j] += a_(i, j) * x[i];
    return y;
  }

  Matrix a_;
  Link link_;
  LinkGradient link_gradient_;
  DensityKind density_kind_;
};

/// f(x) = c^T x. The gradient is the constant c, so C = c c^T exactly
/// under any input density.
class LinearModel : public Model {
 public:
  explicit LinearModel(Vector c, DensityKind density_kind = DensityKind::UniformHypercube)
      : c_(std::move(c)), density_kind_(density_kind) {
    if (c_.size() < 2) throw std::invalid_argument("LinearModel: requires m >= 2");
  }

  std::size_t dimension() const override { return c_.size(); }
  InputDensity density() const override { return {density_kind_, c_.size()}; }

  double value(std::span<const double> x) const override {
    check_input(x);
    return dot(c_, x);
  }

  Vector gradient(std::span<const double> x) const override {
    check_input(x);
    return c_;
  }

  bool has_analytic_C() const override { return true; }
  Matrix analytic_C() const override {
    Matrix c(c_.size(), c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < c_.size(); ++j) c(i, j) = c_[i] * c_[j];
    return c;
  }

  const Vector& coefficients() const { return c_; }

  json describe() const override { return {{"kind", "linear"}, {"m", c_.size()}}; }

 private:
  Vector c_;
  DensityKind density_kind_;
};

/// Forward differences of an arbitrary scalar function; no support checks.
template <typename F>
Vector forward_difference(F&& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite differences: h must be > 0");
  Vector probe(x.begin(), x.end());
  const double f0 = f(std::span<const double>(probe));
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    g[i] = (f(std::span<const double>(probe)) - f0) / h;
    probe[i] = xi;
  }
  return g;
}

/// Forward-difference gradient g_i = (f(x + h e_i) - f(x)) / h. On the
/// hypercube every probe x + h e_i must stay inside the support; we
/// refuse rather than clamp, since clamping silently biases C estimates.
inline Vector finite_difference_gradient(const Model& model, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite differences: h must be > 0");
  const std::size_t m = model.dimension();
  if (x.size() != m)
    throw std::invalid_argument("finite differences: dimension mismatch");
  if (model.density().kind == DensityKind::UniformHypercube)
    for (std::size_t i = 0; i < m; ++i)
      if (x[i] + h > 1.0)
        throw std::domain_error("finite differences: x + h*e_" + std::to_string(i + 1) +
                                " leaves the [-1,1] support (coordinate " + std::to_string(i + 1) +
                                ")");
  return forward_difference([&](std::span<const double> p) { return model.value(p); }, x, h);
}

/// Gradient per the requested source.
inline Vector evaluate_gradient(const Model& model, std::span<const double> x,
                                const GradientSource& source) {
  switch (source.kind) {
    case GradientSource::Kind::Exact:
      return model.gradient(x);
    case GradientSource::Kind::ForwardDifference:
      return finite_difference_gradient(model, x, source.step);
    case GradientSource::Kind::External:
      throw std::invalid_argument("cannot evaluate gradients for an external source");
  }
  throw std::logic_error("unreachable");
}

}  // namespace actsub
