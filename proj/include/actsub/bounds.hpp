#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "actsub/estimator.hpp"
#include "actsub/linalg.hpp"
#include "actsub/sampling.hpp"

namespace actsub {

// Evaluable forms of the theory: tail probabilities for eigenvalue and
// matrix deviations, the sufficient sample counts from the proofs (explicit
// constants, natural logarithms), and the approximate-gradient bias terms.
// "High probability" is parameterized by beta: failure probability m^-beta.

namespace detail {
inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

inline std::size_t ceil_to_count(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("sample count formula produced a negative value");
  if (x > 9e18) throw std::invalid_argument("sample count formula overflowed");
  const auto n = static_cast<std::size_t>(std::ceil(x));
  return n < 1 ? 1 : n;
}
}  // namespace detail

/// Practical heuristic N = alpha k log(m), floored at k so C_hat can carry
/// k nonzero eigenvalues.
inline std::size_t heuristic_sample_count(std::size_t k, std::size_t m, double alpha) {
  if (k < 1) throw std::invalid_argument("heuristic_sample_count: k must be >= 1");
  if (m < 2) throw std::invalid_argument("heuristic_sample_count: m must be >= 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("heuristic_sample_count: alpha must be > 0");
  const double raw = alpha * static_cast<double>(k) * std::log(static_cast<double>(m));
  return std::max<std::size_t>(k, detail::ceil_to_count(raw));
}

struct TailProbabilities {
  double upper;  // P[lambda_hat_k >= (1+eps) lambda_k]
  double lower;  // P[lambda_hat_k <= (1-eps) lambda_k]
};

/// Bernstein tail bounds for the k-th eigenvalue estimate, clamped to
/// [0,1]. Requires 0 < eps <= 1 and lambda_k > 0.
inline TailProbabilities eigenvalue_deviation_probabilities(double lambda1, double lambda_k,
                                                            std::size_t m, std::size_t k,
                                                            std::size_t n_samples, double L,
                                                            double eps) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("eigenvalue deviation: eps must be in (0,1]");
  if (!(lambda_k > 0.0))
    throw std::invalid_argument("eigenvalue deviation: lambda_k must be > 0 (bound is vacuous)");
  if (!(lambda1 >= lambda_k)) throw std::invalid_argument("eigenvalue deviation: lambda1 < lambda_k");
  if (!(L > 0.0)) throw std::invalid_argument("eigenvalue deviation: L must be > 0");
  if (k < 1 || k > m) throw std::invalid_argument("eigenvalue deviation: need 1 <= k <= m");
  const double n = static_cast<double>(n_samples);
  const double upper = static_cast<double>(m - k + 1) *
                       std::exp(-n * lambda_k * eps * eps / (4.0 * L * L));
  const double lower = static_cast<double>(k) *
                       std::exp(-n * lambda_k * lambda_k * eps * eps / (4.0 * lambda1 * L * L));
  return {detail::clamp_probability(upper), detail::clamp_probability(lower)};
}

/// Sufficient N for |lambda_hat_k - lambda_k| <= eps lambda_k with failure
/// probability <= 2 m^-beta: the larger of the two proof conditions,
/// N = ceil(4 (beta+1) L^2 kappa_k^2 / (lambda1 eps^2) log m).
inline std::size_t required_N_eigenvalue(double lambda1, double lambda_k, std::size_t m, double L,
                                         double eps, double beta = 1.0) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("required_N_eigenvalue: eps must be in (0,1]");
  if (!(lambda_k > 0.0)) throw std::invalid_argument("required_N_eigenvalue: lambda_k must be > 0");
  if (!(lambda1 >= lambda_k)) throw std::invalid_argument("required_N_eigenvalue: lambda1 < lambda_k");
  if (!(L > 0.0)) throw std::invalid_argument("required_N_eigenvalue: L must be > 0");
  if (m < 2) throw std::invalid_argument("required_N_eigenvalue: m must be >= 2");
  if (!(beta >= 0.0)) throw std::invalid_argument("required_N_eigenvalue: beta must be >= 0");
  const double kappa = lambda1 / lambda_k;
  const double raw = 4.0 * (beta + 1.0) * L * L * kappa * kappa /
                     (lambda1 * eps * eps) * std::log(static_cast<double>(m));
  return detail::ceil_to_count(raw);
}

/// Two-branch Bernstein bound on P[||C_hat - C|| >= eps ||C||], with the
/// branch chosen by eps against nu^2 / (lambda1 L^2).
inline double matrix_error_probability(double lambda1, double nu2, double L, std::size_t m,
                                       std::size_t n_samples, double eps) {
  if (!(nu2 > 0.0)) throw std::invalid_argument("matrix_error_probability: nu2 must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("matrix_error_probability: eps must be > 0");
  if (!(lambda1 > 0.0)) throw std::invalid_argument("matrix_error_probability: lambda1 must be > 0");
  if (!(L > 0.0)) throw std::invalid_argument("matrix_error_probability: L must be > 0");
  const double n = static_cast<double>(n_samples);
  const double crossover = nu2 / (lambda1 * L * L);
  const double exponent = eps <= crossover
                              ? -3.0 * n * lambda1 * lambda1 * eps * eps / (8.0 * nu2)
                              : -3.0 * n * lambda1 * eps / (8.0 * L * L);
  return detail::clamp_probability(2.0 * static_cast<double>(m) * std::exp(exponent));
}

/// delta = max(nu^2 / (lambda1 eps), L^2).
inline double matrix_error_delta(double lambda1, double nu2, double L, double eps) {
  return std::max(nu2 / (lambda1 * eps), L * L);
}

/// Sufficient N for ||C_hat - C|| <= eps ||C|| with high probability:
/// N = ceil((8/3) (beta+1) delta / (lambda1 eps) log(2m)).
inline std::size_t required_N_matrix(double lambda1, double nu2, double L, std::size_t m,
                                     double eps, double beta = 1.0) {
  if (!(nu2 > 0.0)) throw std::invalid_argument("required_N_matrix: nu2 must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("required_N_matrix: eps must be > 0");
  if (!(lambda1 > 0.0)) throw std::invalid_argument("required_N_matrix: lambda1 must be > 0");
  if (!(L > 0.0)) throw std::invalid_argument("required_N_matrix: L must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("required_N_matrix: beta must be >= 0");
  const double delta = matrix_error_delta(lambda1, nu2, L, eps);
  const double raw = (8.0 / 3.0) * (beta + 1.0) * delta / (lambda1 * eps) *
                     std::log(2.0 * static_cast<double>(m));
  return detail::ceil_to_count(raw);
}

struct SubspaceErrorBound {
  double bound;
  bool eps_valid;  // eps <= min(1, (lambda_n - lambda_{n+1}) / (5 lambda1))
};

/// Exact-gradient subspace error bound 4 lambda1 eps / (lambda_n -
/// lambda_{n+1}), valid when eps satisfies the stated cap.
inline SubspaceErrorBound subspace_error_bound(const Vector& lambda, std::size_t n, double eps) {
  if (n < 1 || n >= lambda.size())
    throw std::invalid_argument("subspace_error_bound: need 1 <= n < m");
  if (!(eps >= 0.0)) throw std::invalid_argument("subspace_error_bound: eps must be >= 0");
  const double lambda1 = lambda.front();
  const double gap = lambda[n - 1] - lambda[n];
  if (!(gap > 0.0)) throw std::invalid_argument("zero spectral gap: bound undefined");
  SubspaceErrorBound out;
  out.bound = 4.0 * lambda1 * eps / gap;
  out.eps_valid = eps <= std::min(1.0, gap / (5.0 * lambda1));
  return out;
}

/// ||C_hat - G_hat|| <= sqrt(m) gamma_h (sqrt(m) gamma_h + 2L): the
/// matrix-level cost of using approximate gradients with componentwise
/// error level gamma_h.
inline double grad_error_matrix_bound(std::size_t m, double gamma_h, double L) {
  if (!(gamma_h >= 0.0)) throw std::invalid_argument("grad_error_matrix_bound: gamma_h must be >= 0");
  if (!(L > 0.0)) throw std::invalid_argument("grad_error_matrix_bound: L must be > 0");
  const double t = std::sqrt(static_cast<double>(m)) * gamma_h;
  return t * (t + 2.0 * L);
}

/// |lambda_k - theta_hat_k| <= eps lambda_k + matrix term: finite-sample
/// error plus the approximate-gradient bias.
inline double eigenvalue_bias_bound(double lambda_k, double eps, std::size_t m, double gamma_h,
                                    double L) {
  if (!(lambda_k >= 0.0)) throw std::invalid_argument("eigenvalue_bias_bound: lambda_k must be >= 0");
  if (!(eps >= 0.0)) throw std::invalid_argument("eigenvalue_bias_bound: eps must be >= 0");
  return eps * lambda_k + grad_error_matrix_bound(m, gamma_h, L);
}

struct ApproxSubspaceErrorBound {
  double bound;
  bool h_condition_met;    // sqrt(m) g_h (sqrt(m) g_h + 2L) <= adjusted gap / 5
  bool eps_condition_met;  // eps < min(1, gap/(5 l1), gap/(l_n + l_{n+1}))
};

/// Approximate-gradient subspace error: a term driven by the gradient
/// error over the eps-adjusted gap plus the exact-gradient term, as the
/// theorem states it.
inline ApproxSubspaceErrorBound subspace_error_bound_approx(const Vector& lambda, std::size_t n,
                                                            double eps, std::size_t m,
                                                            double gamma_h, double L) {
  if (n < 1 || n >= lambda.size())
    throw std::invalid_argument("subspace_error_bound_approx: need 1 <= n < m");
  const double lambda1 = lambda.front();
  const double ln = lambda[n - 1], lnp1 = lambda[n];
  const double gap = ln - lnp1;
  if (!(gap > 0.0)) throw std::invalid_argument("zero spectral gap: bound undefined");
  if (!(eps > 0.0)) throw std::invalid_argument("subspace_error_bound_approx: eps must be > 0");
  ApproxSubspaceErrorBound out;
  out.eps_condition_met =
      eps < std::min({1.0, gap / (5.0 * lambda1), gap / (ln + lnp1)});
  const double adjusted_gap = (1.0 - eps) * ln - (1.0 + eps) * lnp1;
  const double mat = grad_error_matrix_bound(m, gamma_h, L);
  out.h_condition_met = adjusted_gap > 0.0 && mat <= adjusted_gap / 5.0;
  if (!(adjusted_gap > 0.0))
    throw std::invalid_argument(
        "subspace_error_bound_approx: eps too large, adjusted gap not positive");
  out.bound = 4.0 * mat / adjusted_gap + 4.0 * lambda1 / gap;
  return out;
}

struct GradientMoments {
  double L_hat;    // max_j ||grad_j||
  double nu2_hat;  // || (1/N) sum_j (grad_j grad_j^T - C_hat)^2 ||
};

/// Empirical plug-ins for the bound parameters L and nu^2, which are
/// rarely known a priori.
inline GradientMoments estimate_L_and_nu2(const GradientSampleSet& samples, const Matrix& c_hat) {
  samples.validate();
  const std::size_t n = samples.count(), m = samples.dimension();
  if (n < 2) throw std::invalid_argument("estimate_L_and_nu2: need N >= 2");
  if (c_hat.rows() != m || c_hat.cols() != m)
    throw std::invalid_argument("estimate_L_and_nu2: C_hat shape mismatch");

  double l_hat = 0.0;
  // (g g^T - C)^2 = |g|^2 g g^T - g (Cg)^T - (Cg) g^T + C^2
  Matrix acc = matmul(c_hat, c_hat);
  Matrix mean_sq(m, m);
  for (std::size_t j = 0; j < n; ++j) {
    auto g = samples.gradients.row(j);
    l_hat = std::max(l_hat, norm2(g));
    const Vector cg = matvec(c_hat, g);
    const double gg = dot(g, g);
    for (std::size_t r = 0; r < m; ++r) {
      auto row = mean_sq.row(r);
      const double gr = g[r], cgr = cg[r];
      for (std::size_t s = 0; s < m; ++s)
        row[s] += gg * gr * g[s] - gr * cg[s] - cgr * g[s];
    }
  }
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t s = 0; s < m; ++s)
      mean_sq(r, s) = mean_sq(r, s) / static_cast<double>(n) + acc(r, s);
  return {l_hat, symmetric_spectral_norm(mean_sq)};
}

/// Evaluates every bound the provided inputs allow and reports them as
/// one JSON object; quantities whose inputs are missing are listed under
/// "skipped" with the reason.
inline json bounds_report(const json& input) {
  json report{{"schema_version", 1}, {"input", input}};
  json skipped = json::object();

  const auto has = [&](const char* key) { return input.contains(key) && !input[key].is_null(); };
  const auto count_field = [&](const char* key) -> std::size_t {
    const auto v = input[key].get<std::int64_t>();
    if (v < 0) throw std::invalid_argument(std::string("bounds: '") + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  };
  const double beta = has("beta") ? input["beta"].get<double>() : 1.0;
  report["beta"] = beta;

  std::optional<std::size_t> m;
  if (has("m")) m = count_field("m");
  std::optional<Vector> lambda;
  if (has("lambda")) {
    lambda = input["lambda"].get<Vector>();
    if (lambda->empty()) throw std::invalid_argument("bounds: lambda must be nonempty");
    for (std::size_t i = 1; i < lambda->size(); ++i)
      if ((*lambda)[i] > (*lambda)[i - 1] || (*lambda)[i] < 0.0)
        throw std::invalid_argument("bounds: lambda must be descending and nonnegative");
  }

  if (has("k") && has("alpha") && m)
    report["heuristic_N"] = heuristic_sample_count(count_field("k"), *m, input["alpha"]);
  else
    skipped["heuristic_N"] = "needs k, m, alpha";

  const bool have_eig_inputs = m && lambda && has("k") && has("L") && has("eps");
  if (have_eig_inputs) {
    const std::size_t k = count_field("k");
    if (k < 1 || k > lambda->size()) throw std::invalid_argument("bounds: k out of range of lambda");
    const double l1 = lambda->front(), lk = (*lambda)[k - 1];
    const double L = input["L"], eps = input["eps"];
    report["required_N_eigenvalue"] = required_N_eigenvalue(l1, lk, *m, L, eps, beta);
    if (has("N")) {
      auto tails = eigenvalue_deviation_probabilities(l1, lk, *m, k, count_field("N"), L, eps);
      report["eigenvalue_deviation"] = {{"p_upper", tails.upper}, {"p_lower", tails.lower}};
    } else {
      skipped["eigenvalue_deviation"] = "needs N";
    }
  } else {
    skipped["required_N_eigenvalue"] = "needs lambda, k, m, L, eps";
    skipped["eigenvalue_deviation"] = "needs lambda, k, m, L, eps, N";
  }

  if (m && lambda && has("L") && has("eps") && has("nu2")) {
    const double l1 = lambda->front();
    const double L = input["L"], eps = input["eps"], nu2 = input["nu2"];
    report["delta"] = matrix_error_delta(l1, nu2, L, eps);
    report["required_N_matrix"] = required_N_matrix(l1, nu2, L, *m, eps, beta);
    if (has("N"))
      report["matrix_error_probability"] =
          matrix_error_probability(l1, nu2, L, *m, count_field("N"), eps);
    else
      skipped["matrix_error_probability"] = "needs N";
  } else {
    skipped["required_N_matrix"] = "needs lambda, m, L, eps, nu2";
  }

  if (lambda && has("n") && has("eps")) {
    const std::size_t n = count_field("n");
    auto sb = subspace_error_bound(*lambda, n, input["eps"]);
    report["subspace_error_bound"] = {{"bound", sb.bound}, {"eps_valid", sb.eps_valid}};
    if (m && has("gamma_h") && has("L")) {
      auto ab = subspace_error_bound_approx(*lambda, n, input["eps"], *m, input["gamma_h"],
                                            input["L"]);
      report["subspace_error_bound_approx"] = {{"bound", ab.bound},
                                               {"h_condition_met", ab.h_condition_met},
                                               {"eps_condition_met", ab.eps_condition_met}};
    } else {
      skipped["subspace_error_bound_approx"] = "needs m, gamma_h, L";
    }
  } else {
    skipped["subspace_error_bound"] = "needs lambda, n, eps";
  }

  if (m && has("gamma_h") && has("L")) {
    report["grad_error_matrix_bound"] = grad_error_matrix_bound(*m, input["gamma_h"], input["L"]);
    if (lambda && has("k") && has("eps")) {
      const std::size_t k = count_field("k");
      if (k >= 1 && k <= lambda->size())
        report["eigenvalue_bias_bound"] =
            eigenvalue_bias_bound((*lambda)[k - 1], input["eps"], *m, input["gamma_h"], input["L"]);
    }
  } else {
    skipped["grad_error_matrix_bound"] = "needs m, gamma_h, L";
  }

  report["skipped"] = std::move(skipped);
  return report;
}

}  // namespace actsub
