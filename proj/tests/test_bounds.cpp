#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "actsub/bench.hpp"
#include "actsub/bounds.hpp"
#include "actsub/models.hpp"
#include "actsub/sampling.hpp"

using namespace actsub;

TEST_CASE("heuristic sample count anchors", "[bounds]") {
  CHECK(heuristic_sample_count(6, 10, 2.0) == 28);
  CHECK(heuristic_sample_count(6, 100, 2.0) == 56);
  CHECK(heuristic_sample_count(5, 2, 0.1) == 5);  // floored at k
  CHECK_THROWS_AS(heuristic_sample_count(6, 1, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(heuristic_sample_count(0, 10, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(heuristic_sample_count(6, 10, 0.0), std::invalid_argument);
}

TEST_CASE("eigenvalue deviation probabilities", "[bounds]") {
  // N = 0 makes both exponentials one; the prefactors clamp to 1
  auto tails = eigenvalue_deviation_probabilities(1.0, 0.5, 10, 3, 0, 2.0, 0.5);
  CHECK(tails.upper == 1.0);
  CHECK(tails.lower == 1.0);

  // the rank-one substitution lambda_1 = lambda_k = L^2 collapses the
  // upper tail to m exp(-N eps^2 / 4)
  const double L = 1.7, eps = 0.25;
  const std::size_t m = 7, n = 400;
  tails = eigenvalue_deviation_probabilities(L * L, L * L, m, 1, n, L, eps);
  const double expected = static_cast<double>(m) * std::exp(-static_cast<double>(n) * eps * eps / 4.0);
  CHECK_THAT(tails.upper, Catch::Matchers::WithinRel(expected, 1e-14));
  CHECK_THAT(tails.lower, Catch::Matchers::WithinRel(expected / static_cast<double>(m), 1e-14));

  // strictly decreasing in N once the clamp at one is left behind
  double prev_u = 2.0, prev_l = 2.0;
  for (std::size_t nn : {30, 60, 120, 240}) {
    auto t = eigenvalue_deviation_probabilities(1.0, 0.5, 6, 2, nn, 1.0, 1.0);
    CHECK(t.upper < prev_u);
    CHECK(t.lower < prev_l);
    prev_u = t.upper;
    prev_l = t.lower;
  }

  CHECK_THROWS_AS(eigenvalue_deviation_probabilities(1.0, 0.0, 5, 2, 10, 1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(eigenvalue_deviation_probabilities(1.0, 0.5, 5, 2, 10, 1.0, 1.5),
                  std::invalid_argument);
}

TEST_CASE("required N for eigenvalue accuracy", "[bounds]") {
  // flat spectrum with lambda1 = L^2, beta = 1, eps = 1: N = ceil(8 ln m)
  CHECK(required_N_eigenvalue(4.0, 4.0, 7, 2.0, 1.0, 1.0) ==
        static_cast<std::size_t>(std::ceil(8.0 * std::log(7.0))));

  // doubling eps quarters N (up to the ceiling)
  const std::size_t n_fine = required_N_eigenvalue(1.0, 0.25, 12, 1.3, 0.25, 1.0);
  const std::size_t n_coarse = required_N_eigenvalue(1.0, 0.25, 12, 1.3, 0.5, 1.0);
  CHECK(n_coarse <= n_fine / 4 + 1);
  CHECK(n_fine <= 4 * n_coarse + 4);

  // plugging the returned N back drives both tails below m^-beta
  for (double beta : {0.5, 1.0, 2.0}) {
    const double l1 = 0.8, lk = 0.1, L = 1.1, eps = 0.6;
    const std::size_t m = 9, k = 3;
    const std::size_t n = required_N_eigenvalue(l1, lk, m, L, eps, beta);
    auto tails = eigenvalue_deviation_probabilities(l1, lk, m, k, n, L, eps);
    const double budget = std::pow(static_cast<double>(m), -beta);
    CHECK(tails.upper <= budget);
    CHECK(tails.lower <= budget);
  }

  CHECK_THROWS_AS(required_N_eigenvalue(1.0, 0.0, 5, 1.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("matrix error probability has a continuous crossover", "[bounds]") {
  const double l1 = 0.7, nu2 = 0.35, L = 1.2;
  const std::size_t m = 8, n = 60;
  const double crossover = nu2 / (l1 * L * L);
  const double below = matrix_error_probability(l1, nu2, L, m, n, crossover * (1.0 - 1e-13));
  const double above = matrix_error_probability(l1, nu2, L, m, n, crossover * (1.0 + 1e-13));
  const double at = matrix_error_probability(l1, nu2, L, m, n, crossover);
  CHECK_THAT(below, Catch::Matchers::WithinRel(at, 1e-10));
  CHECK_THAT(above, Catch::Matchers::WithinRel(at, 1e-10));
  const double closed_form =
      2.0 * static_cast<double>(m) *
      std::exp(-3.0 * static_cast<double>(n) * nu2 / (8.0 * L * L * L * L));
  CHECK_THAT(at, Catch::Matchers::WithinRel(closed_form, 1e-12));

  CHECK(matrix_error_probability(l1, nu2, L, m, 0, 0.3) == 1.0);

  double prev = 2.0;
  for (std::size_t nn : {50, 100, 200}) {
    const double p = matrix_error_probability(l1, nu2, L, m, nn, 0.3);
    CHECK(p < prev);
    prev = p;
  }

  CHECK_THROWS_AS(matrix_error_probability(l1, 0.0, L, m, 10, 0.3), std::invalid_argument);
}

TEST_CASE("required N for matrix accuracy", "[bounds]") {
  // delta picks the larger branch
  CHECK_THAT(matrix_error_delta(1.0, 1.0, 1.0, 0.5), Catch::Matchers::WithinRel(2.0, 1e-15));
  CHECK_THAT(matrix_error_delta(1.0, 0.1, 2.0, 0.5), Catch::Matchers::WithinRel(4.0, 1e-15));

  // when nu^2/(lambda1 eps) <= L^2 the count reduces to the L^2 branch
  {
    const double l1 = 0.9, nu2 = 0.05, L = 1.4, eps = 0.4, beta = 1.0;
    const std::size_t m = 11;
    const double expected =
        (8.0 / 3.0) * (beta + 1.0) * L * L / (l1 * eps) * std::log(2.0 * 11.0);
    CHECK(required_N_matrix(l1, nu2, L, m, eps, beta) ==
          static_cast<std::size_t>(std::ceil(expected)));
  }

  // hand-substitution case: delta = max(1/(1*0.5), 1) = 2
  // (the proof constant carries (beta+1); with beta = 2 that is a factor 3)
  CHECK(required_N_matrix(1.0, 1.0, 1.0, 5, 0.5, 2.0) ==
        static_cast<std::size_t>(std::ceil(8.0 * (2.0 / 0.5) * std::log(10.0))));

  // eps scaling: quadratic in the nu^2 regime, linear in the L^2 regime
  {
    const double l1 = 1.0, nu2 = 50.0, L = 1.0;  // nu^2 dominates
    const std::size_t m = 6;
    const std::size_t n1 = required_N_matrix(l1, nu2, L, m, 0.2, 1.0);
    const std::size_t n2 = required_N_matrix(l1, nu2, L, m, 0.1, 1.0);
    CHECK(n2 >= 4 * n1 - 4);
    CHECK(n2 <= 4 * n1 + 4);
  }
  {
    const double l1 = 1.0, nu2 = 1e-4, L = 1.0;  // L^2 dominates
    const std::size_t m = 6;
    const std::size_t n1 = required_N_matrix(l1, nu2, L, m, 0.2, 1.0);
    const std::size_t n2 = required_N_matrix(l1, nu2, L, m, 0.1, 1.0);
    CHECK(n2 >= 2 * n1 - 4);
    CHECK(n2 <= 2 * n1 + 4);
  }
}

TEST_CASE("subspace error bound", "[bounds]") {
  CHECK(subspace_error_bound({1.0, 0.5, 0.1}, 1, 0.0).bound == 0.0);

  const auto b = subspace_error_bound({1.0, 0.1, 0.01}, 1, 0.05);
  CHECK_THAT(b.bound, Catch::Matchers::WithinRel(4.0 * 0.05 / 0.9, 1e-14));
  CHECK(b.eps_valid);  // 0.05 <= 0.18

  const auto tight = subspace_error_bound({1.0, 0.1, 0.01}, 1, 0.2);
  CHECK_FALSE(tight.eps_valid);

  // a larger gap gives a smaller bound at fixed eps
  const Vector lam{1.0, 0.9, 0.2, 0.15};
  const auto small_gap = subspace_error_bound(lam, 1, 0.01);
  const auto large_gap = subspace_error_bound(lam, 2, 0.01);
  CHECK(large_gap.bound < small_gap.bound);

  CHECK_THROWS_WITH(subspace_error_bound({1.0, 0.5, 0.5, 0.1}, 2, 0.1),
                    Catch::Matchers::ContainsSubstring("zero spectral gap"));
}

TEST_CASE("gradient error matrix bound", "[bounds]") {
  CHECK(grad_error_matrix_bound(9, 0.0, 2.0) == 0.0);
  CHECK_THAT(grad_error_matrix_bound(4, 0.5, 1.0), Catch::Matchers::WithinRel(3.0, 1e-15));
  CHECK_THROWS_AS(grad_error_matrix_bound(4, -0.1, 1.0), std::invalid_argument);
}

TEST_CASE("eigenvalue bias bound decomposes additively", "[bounds]") {
  const double lk = 0.3, eps = 0.2, L = 1.5;
  const std::size_t m = 6;
  CHECK(eigenvalue_bias_bound(lk, eps, m, 0.0, L) == eps * lk);
  const double gamma_h = 0.04;
  CHECK_THAT(eigenvalue_bias_bound(lk, eps, m, gamma_h, L),
             Catch::Matchers::WithinRel(eps * lk + grad_error_matrix_bound(m, gamma_h, L), 1e-15));
}

TEST_CASE("approximate-gradient subspace bound on the worked example", "[bounds]") {
  const Vector lam{1.0, 0.5, 0.1};
  const auto b = subspace_error_bound_approx(lam, 2, 0.1, 4, 0.01, 1.0);
  const double first = 4.0 * (0.02 * 2.02) / 0.34;
  CHECK_THAT(b.bound, Catch::Matchers::WithinRel(first + 4.0 * 1.0 / 0.4, 1e-12));
  CHECK(b.h_condition_met);  // 0.0404 <= 0.068
  // eps = 0.1 violates gap/(5 lambda1) = 0.08, so the theorem's eps cap fails
  CHECK_FALSE(b.eps_condition_met);

  // gamma_h = 0 removes the first term entirely
  const auto exact = subspace_error_bound_approx(lam, 2, 0.05, 4, 0.0, 1.0);
  CHECK_THAT(exact.bound, Catch::Matchers::WithinRel(4.0 * 1.0 / 0.4, 1e-14));
  CHECK(exact.h_condition_met);

  // the denominator stays positive whenever eps < gap / (l_n + l_{n+1})
  for (double eps : {0.05, 0.2, 0.3}) {
    const double gap_ratio = 0.4 / 0.6;
    if (eps < gap_ratio) {
      const auto bb = subspace_error_bound_approx(lam, 2, eps, 4, 0.001, 1.0);
      CHECK(bb.bound > 0.0);
    }
  }

  CHECK_THROWS_WITH(subspace_error_bound_approx({1.0, 0.5, 0.5}, 2, 0.05, 4, 0.01, 1.0),
                    Catch::Matchers::ContainsSubstring("zero spectral gap"));
}

TEST_CASE("empirical L and nu2 plug-ins", "[bounds]") {
  // constant gradients have zero deviation
  const LinearModel lin{Vector{3.0, 4.0}};
  const auto lset = sample_gradients(lin, 8, 1);
  const auto lm = estimate_L_and_nu2(lset, estimate_C(lset));
  CHECK_THAT(lm.L_hat, Catch::Matchers::WithinRel(5.0, 1e-14));
  CHECK(lm.nu2_hat <= 1e-12);

  // the documented two-gradient case
  GradientSampleSet two;
  two.gradients = Matrix(2, 2);
  two.gradients(0, 0) = 1.0;
  two.gradients(1, 1) = 1.0;
  const auto tm = estimate_L_and_nu2(two, estimate_C(two));
  CHECK_THAT(tm.L_hat, Catch::Matchers::WithinRel(1.0, 1e-15));
  CHECK_THAT(tm.nu2_hat, Catch::Matchers::WithinRel(0.25, 1e-13));

  // against a direct evaluation of the defining mean of squared deviations
  const QuadraticModel model = build_quadratic_case(1, 6, 3);
  const auto qset = sample_gradients(model, 23, 6);
  const Matrix c = estimate_C(qset);
  const auto qm = estimate_L_and_nu2(qset, c);
  const std::size_t m = 6, n = 23;
  Matrix mean_sq(m, m);
  for (std::size_t j = 0; j < n; ++j) {
    Matrix d(m, m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t s = 0; s < m; ++s)
        d(r, s) = qset.gradients(j, r) * qset.gradients(j, s) - c(r, s);
    const Matrix d2 = matmul(d, d);
    for (std::size_t i = 0; i < m * m; ++i) mean_sq.data()[i] += d2.data()[i];
  }
  for (auto& v : mean_sq.data()) v /= static_cast<double>(n);
  CHECK_THAT(qm.nu2_hat, Catch::Matchers::WithinRel(symmetric_spectral_norm(mean_sq), 1e-11));
  double lmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) lmax = std::max(lmax, norm2(qset.gradients.row(j)));
  CHECK(qm.L_hat == lmax);

  GradientSampleSet single;
  single.gradients = Matrix(1, 2, 1.0);
  CHECK_THROWS_AS(estimate_L_and_nu2(single, estimate_C(single)), std::invalid_argument);
}

TEST_CASE("measured FD estimates stay under the matrix bound", "[bounds]") {
  const QuadraticModel model = build_quadratic_case(1, 6, 11);
  const Matrix& a = model.matrix();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < 6; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));

  for (double h : {1e-1, 1e-3, 1e-5}) {
    // probes may cross the +1 face at the coarse step; the benchmark
    // sampler evaluates them through the extended polynomial, and the
    // componentwise error identity (h/2) A_ii holds globally
    const std::int64_t seed = 40;
    const GradientSampleSet approx = quadratic_fd_samples(model, 30, seed, h);
    const GradientSampleSet exact = sample_gradients(model, 30, seed, GradientSource::exact());

    double L = 0.0;
    for (std::size_t j = 0; j < 30; ++j) L = std::max(L, norm2(exact.gradients.row(j)));
    const double gamma_h = 0.5 * h * max_diag;

    const Matrix ce = estimate_C(exact);
    const Matrix cg = estimate_C(approx);
    Matrix diff(6, 6);
    for (std::size_t i = 0; i < 36; ++i) diff.data()[i] = ce.data()[i] - cg.data()[i];
    const double measured = symmetric_spectral_norm(diff);
    CHECK(measured <= grad_error_matrix_bound(6, gamma_h, L));
  }
}

TEST_CASE("bounds report evaluates what the inputs allow", "[bounds]") {
  const json full{{"m", 10},      {"k", 6},           {"n", 1},
                  {"alpha", 2.0}, {"lambda", Vector{1.0, 0.1, 0.01, 0.001, 1e-4, 1e-5}},
                  {"L", 3.0},     {"eps", 0.5},       {"nu2", 0.8},
                  {"beta", 1.0},  {"gamma_h", 0.01},  {"N", 28}};
  const json report = bounds_report(full);
  CHECK(report.at("heuristic_N") == 28);
  CHECK(report.contains("required_N_eigenvalue"));
  CHECK(report.contains("required_N_matrix"));
  CHECK(report.contains("eigenvalue_deviation"));
  CHECK(report.contains("matrix_error_probability"));
  CHECK(report.contains("subspace_error_bound"));
  CHECK(report.contains("subspace_error_bound_approx"));
  CHECK(report.contains("grad_error_matrix_bound"));
  CHECK(report.contains("eigenvalue_bias_bound"));
  CHECK(report.at("skipped").empty());

  const double p_up = report["eigenvalue_deviation"]["p_upper"];
  CHECK(p_up >= 0.0);
  CHECK(p_up <= 1.0);

  const json minimal{{"k", 6}, {"m", 10}, {"alpha", 2.0}};
  const json small = bounds_report(minimal);
  CHECK(small.at("heuristic_N") == 28);
  CHECK(small.at("skipped").contains("required_N_eigenvalue"));
  CHECK(small.at("skipped").contains("subspace_error_bound"));

  CHECK_THROWS_AS(bounds_report(json{{"k", -2}, {"m", 10}, {"alpha", 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bounds_report(json{{"k", 2}, {"m", 10}, {"alpha", 2.0},
                                     {"lambda", Vector{0.1, 1.0}}}),
                  std::invalid_argument);  // lambda must be descending
}
