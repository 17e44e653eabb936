#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "actsub/linalg.hpp"
#include "actsub/rng.hpp"

using namespace actsub;

namespace {

Matrix random_symmetric(std::size_t n, std::int64_t seed) {
  RngStream rng(seed, 0);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.gaussian();
  return a;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::int64_t seed) {
  RngStream rng(seed, 1);
  Matrix a(rows, cols);
  for (auto& v : a.data()) v = rng.gaussian();
  return a;
}

}  // namespace

TEST_CASE("jacobi on diagonal and 2x2 matrices", "[linalg]") {
  Matrix d(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  auto eig = jacobi_eigendecompose(d);
  CHECK(eig.values[0] == 3.0);
  CHECK(eig.values[1] == 1.0);
  CHECK(std::abs(eig.vectors(0, 0)) == 1.0);
  CHECK(std::abs(eig.vectors(1, 1)) == 1.0);

  Matrix s(2, 2);
  s(0, 0) = s(1, 1) = 2.0;
  s(0, 1) = s(1, 0) = 1.0;
  eig = jacobi_eigendecompose(s);
  CHECK_THAT(eig.values[0], Catch::Matchers::WithinAbs(3.0, 1e-14));
  CHECK_THAT(eig.values[1], Catch::Matchers::WithinAbs(1.0, 1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK_THAT(std::abs(eig.vectors(0, 0) * r + eig.vectors(1, 0) * r), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(std::abs(eig.vectors(0, 1) * r - eig.vectors(1, 1) * r), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("jacobi residual and orthogonality on random symmetric input", "[linalg]") {
  for (std::int64_t seed : {1, 2, 3}) {
    const std::size_t n = 20;
    Matrix a = random_symmetric(n, seed);
    auto eig = jacobi_eigendecompose(a);

    for (std::size_t i = 0; i + 1 < n; ++i) CHECK(eig.values[i] >= eig.values[i + 1]);

    Matrix vl = eig.vectors;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) vl(i, j) *= eig.values[j];
    Matrix rec = matmul(vl, eig.vectors.transposed());
    double residual = 0.0;
    for (std::size_t i = 0; i < n * n; ++i)
      residual = std::max(residual, std::abs(rec.data()[i] - a.data()[i]));
    const double scale = std::abs(eig.values[0]);
    CHECK(residual <= 1e-13 * std::max(1.0, scale));

    Matrix gram = matmul(eig.vectors.transposed(), eig.vectors);
    for (std::size_t i = 0; i < n; ++i) gram(i, i) -= 1.0;
    CHECK(max_abs(gram) <= 1e-13);
  }
}

TEST_CASE("jacobi keeps relative accuracy on graded positive definite input", "[linalg]") {
  // diag(10^0 .. 10^-12) rotated by an exactly orthogonal reflector stays
  // representable well enough for per-eigenvalue relative checks
  const std::size_t n = 13;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = std::pow(10.0, -static_cast<double>(i));
  auto eig = jacobi_eigendecompose(a);
  for (std::size_t i = 0; i < n; ++i) {
    const double truth = std::pow(10.0, -static_cast<double>(i));
    CHECK(std::abs(eig.values[i] - truth) <= 1e-13 * truth);
  }
}

TEST_CASE("jacobi rejects non-square input and bad convergence is caught", "[linalg]") {
  CHECK_THROWS_AS(jacobi_eigendecompose(Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("one-sided jacobi svd matches gram-matrix eigenvalues", "[linalg]") {
  const Matrix a = random_matrix(15, 8, 5);
  const Svd svd = one_sided_jacobi_svd(a);
  // independent route: eigenvalues of A^T A
  auto gram_eig = jacobi_eigendecompose(matmul(a.transposed(), a));
  for (std::size_t i = 0; i < 8; ++i) {
    const double s2 = svd.singular_values[i] * svd.singular_values[i];
    CHECK_THAT(s2, Catch::Matchers::WithinRel(gram_eig.values[i], 1e-10));
  }
  // A V has orthogonal columns with norms sigma
  const Matrix av = matmul(a, svd.right_vectors);
  for (std::size_t p = 0; p < 8; ++p)
    for (std::size_t q = p; q < 8; ++q) {
      double d = dot(av.col(p), av.col(q));
      const double target = p == q ? svd.singular_values[p] * svd.singular_values[p] : 0.0;
      CHECK_THAT(d, Catch::Matchers::WithinAbs(target, 1e-10 * (1.0 + target)));
    }
}

TEST_CASE("one-sided jacobi svd handles wide rank-deficient input", "[linalg]") {
  const Matrix a = random_matrix(3, 7, 9);  // rank <= 3
  const Svd svd = one_sided_jacobi_svd(a);
  for (std::size_t i = 3; i < 7; ++i)
    CHECK(svd.singular_values[i] <= 1e-12 * svd.singular_values[0]);
  Matrix gram = matmul(svd.right_vectors.transposed(), svd.right_vectors);
  for (std::size_t i = 0; i < 7; ++i) gram(i, i) -= 1.0;
  CHECK(max_abs(gram) <= 1e-12);
}

TEST_CASE("orthonormalize_columns produces orthogonal basis with fixed signs", "[linalg]") {
  const Matrix a = random_matrix(10, 10, 11);
  const Matrix q = orthonormalize_columns(a);
  Matrix gram = matmul(q.transposed(), q);
  for (std::size_t i = 0; i < 10; ++i) gram(i, i) -= 1.0;
  CHECK(max_abs(gram) <= 1e-12);
  // R = Q^T A has positive diagonal
  const Matrix r = matmul(q.transposed(), a);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r(i, i) > 0.0);

  Matrix dependent(4, 2);
  dependent(0, 0) = 1.0;
  dependent(1, 0) = 2.0;
  dependent(0, 1) = 2.0;
  dependent(1, 1) = 4.0;
  CHECK_THROWS_AS(orthonormalize_columns(dependent), std::invalid_argument);
}

TEST_CASE("tridiagonal solver satisfies the residual", "[linalg]") {
  const std::size_t n = 50;
  RngStream rng(13, 2);
  Vector sub(n - 1), diag(n), sup(n - 1), rhs(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sub[i] = -std::abs(rng.gaussian());
    sup[i] = -std::abs(rng.gaussian());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? std::abs(sub[i - 1]) : 0.0;
    const double right = i + 1 < n ? std::abs(sup[i]) : 0.0;
    diag[i] = left + right + 1.0 + rng.uniform01();
    rhs[i] = rng.gaussian();
  }
  const Vector u = solve_tridiagonal(sub, diag, sup, rhs);
  for (std::size_t i = 0; i < n; ++i) {
    double r = diag[i] * u[i] - rhs[i];
    if (i > 0) r += sub[i - 1] * u[i - 1];
    if (i + 1 < n) r += sup[i] * u[i + 1];
    CHECK(std::abs(r) <= 1e-12);
  }
  CHECK_THROWS_AS(solve_tridiagonal(sub, diag, sup, Vector(n - 1, 0.0)), std::invalid_argument);
}
