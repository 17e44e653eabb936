#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsub/estimator.hpp"
#include "actsub/io.hpp"
#include "actsub/parallel.hpp"
#include "actsub/rng.hpp"
#include "actsub/sampling.hpp"

namespace actsub {

/// Replicate statistics from resampling the gradient rows: componentwise
/// min/max intervals for the first k eigenvalues and, for every candidate
/// dimension n in 1..k, the mean/min/max subspace distance between the
/// point estimate's leading n-space and the replicate's.
struct BootstrapSummary {
  std::size_t n_boot = 0;
  std::int64_t seed = 0;
  Vector point_eigenvalues;  // first k eigenvalues of C_hat
  Vector eigenvalue_lo;
  Vector eigenvalue_hi;
  Vector distance_mean;
  Vector distance_min;
  Vector distance_max;

  std::size_t k() const { return point_eigenvalues.size(); }

  json to_json() const {
    return {{"schema_version", 1},
            {"n_boot", n_boot},
            {"seed", seed},
            {"point_eigenvalues", point_eigenvalues},
            {"eigenvalue_lo", eigenvalue_lo},
            {"eigenvalue_hi", eigenvalue_hi},
            {"distance_mean", distance_mean},
            {"distance_min", distance_min},
            {"distance_max", distance_max}};
  }
  static BootstrapSummary from_json(const json& j) {
    BootstrapSummary s;
    s.n_boot = j.at("n_boot");
    s.seed = j.at("seed");
    s.point_eigenvalues = j.at("point_eigenvalues").get<Vector>();
    s.eigenvalue_lo = j.at("eigenvalue_lo").get<Vector>();
    s.eigenvalue_hi = j.at("eigenvalue_hi").get<Vector>();
    s.distance_mean = j.at("distance_mean").get<Vector>();
    s.distance_min = j.at("distance_min").get<Vector>();
    s.distance_max = j.at("distance_max").get<Vector>();
    return s;
  }

  /// Columns (index, lambda_hat, lo, hi).
  void write_eigenvalue_csv(const std::string& path) const {
    Matrix t(k(), 4);
    for (std::size_t j = 0; j < k(); ++j) {
      t(j, 0) = static_cast<double>(j + 1);
      t(j, 1) = point_eigenvalues[j];
      t(j, 2) = eigenvalue_lo[j];
      t(j, 3) = eigenvalue_hi[j];
    }
    write_csv_matrix(path, t, {"index", "lambda_hat", "lo", "hi"});
  }

  /// Columns (n, dist_mean, dist_min, dist_max).
  void write_subspace_csv(const std::string& path) const {
    Matrix t(k(), 4);
    for (std::size_t j = 0; j < k(); ++j) {
      t(j, 0) = static_cast<double>(j + 1);
      t(j, 1) = distance_mean[j];
      t(j, 2) = distance_min[j];
      t(j, 3) = distance_max[j];
    }
    write_csv_matrix(path, t, {"n", "dist_mean", "dist_min", "dist_max"});
  }
};

/// Nonparametric bootstrap over the gradient rows. Replicate i resamples
/// N rows with replacement using stream (seed, i), rebuilds C*, and
/// decomposes it; replicates are independent, so they may run in
/// parallel, and the aggregation below is order-insensitive (min/max
/// componentwise, means reduced in replicate order).
inline BootstrapSummary bootstrap(const GradientSampleSet& samples, std::size_t k,
                                  std::size_t n_boot, std::int64_t seed) {
  samples.validate();
  const std::size_t n = samples.count(), m = samples.dimension();
  if (k < 1 || k > m)
    throw std::invalid_argument("bootstrap: need 1 <= k <= m, got k = " + std::to_string(k));
  if (n_boot < 1) throw std::invalid_argument("bootstrap: n_boot must be >= 1");

  const ActiveSubspaceEstimate point = make_estimate(samples);

  Matrix replicate_eigs(n_boot, k);
  Matrix replicate_dist(n_boot, k);
  parallel_for(n_boot, [&](std::size_t i) {
    RngStream rng(seed, stream_id::kBootstrap + i);
    Matrix c_star(m, m);
    for (std::size_t draw = 0; draw < n; ++draw) {
      const std::size_t j = rng.uniform_below(n);
      auto g = samples.gradients.row(j);
      for (std::size_t r = 0; r < m; ++r) {
        const double gr = g[r];
        auto row = c_star.row(r);
        for (std::size_t s = 0; s < m; ++s) row[s] += gr * g[s];
      }
    }
    for (double& v : c_star.data()) v /= static_cast<double>(n);
    auto [values, vectors] = eigendecompose(c_star);
    for (std::size_t j = 0; j < k; ++j) replicate_eigs(i, j) = values[j];
    // distance between the point estimate's leading n-space and this
    // replicate's, for every candidate n
    for (std::size_t nn = 1; nn <= k; ++nn) {
      Matrix w1(m, nn), v1(m, nn);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t s = 0; s < nn; ++s) {
          w1(r, s) = point.eigenvectors(r, s);
          v1(r, s) = vectors(r, s);
        }
      replicate_dist(i, nn - 1) = subspace_distance(w1, v1);
    }
  });

  BootstrapSummary out;
  out.n_boot = n_boot;
  out.seed = seed;
  out.point_eigenvalues.assign(point.eigenvalues.begin(), point.eigenvalues.begin() + k);
  out.eigenvalue_lo.assign(k, std::numeric_limits<double>::infinity());
  out.eigenvalue_hi.assign(k, -std::numeric_limits<double>::infinity());
  out.distance_mean.assign(k, 0.0);
  out.distance_min.assign(k, std::numeric_limits<double>::infinity());
  out.distance_max.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n_boot; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out.eigenvalue_lo[j] = std::min(out.eigenvalue_lo[j], replicate_eigs(i, j));
      out.eigenvalue_hi[j] = std::max(out.eigenvalue_hi[j], replicate_eigs(i, j));
      out.distance_min[j] = std::min(out.distance_min[j], replicate_dist(i, j));
      out.distance_max[j] = std::max(out.distance_max[j], replicate_dist(i, j));
      out.distance_mean[j] += replicate_dist(i, j);
    }
  }
  for (double& v : out.distance_mean) v /= static_cast<double>(n_boot);
  return out;
}

struct DimensionSuggestion {
  std::size_t n = 0;
  bool gap_found = false;  // bootstrap intervals disjoint at the chosen gap
};

/// Picks n at the largest log-scale eigenvalue gap among the first k
/// estimates (a gap down to an exact zero counts as infinite); ties go to
/// the smallest n. gap_found reports whether the intervals around the
/// chosen gap are disjoint.
inline DimensionSuggestion suggest_dimension(const BootstrapSummary& summary) {
  const std::size_t k = summary.k();
  if (k < 2) throw std::invalid_argument("suggest_dimension: needs k >= 2");
  const Vector& lambda = summary.point_eigenvalues;
  const double lead = lambda.front();
  if (!(lead > 0.0))
    throw std::invalid_argument("suggest_dimension: no usable spectrum (all eigenvalues ~ 0)");
  const double floor = 1e-14 * lead;

  double best_gap = -std::numeric_limits<double>::infinity();
  std::size_t best_n = 0;
  for (std::size_t j = 1; j < k; ++j) {
    const double hi = lambda[j - 1], lo = lambda[j];
    if (hi <= floor) break;  // spectrum below resolution from here on
    // log of the ratio: exact ratios (a geometric spectrum) tie exactly,
    // so the smallest-index preference below is meaningful
    const double gap = lo <= 0.0 ? std::numeric_limits<double>::infinity() : std::log(hi / lo);
    if (gap > best_gap) {
      best_gap = gap;
      best_n = j;
    }
  }
  if (best_n == 0)
    throw std::invalid_argument("suggest_dimension: no usable spectrum (all eigenvalues ~ 0)");
  DimensionSuggestion out;
  out.n = best_n;
  out.gap_found = summary.eigenvalue_hi[best_n] < summary.eigenvalue_lo[best_n - 1];
  return out;
}

}  // namespace actsub
