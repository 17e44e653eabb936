#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "actsub/io.hpp"
#include "actsub/linalg.hpp"
#include "actsub/models.hpp"
#include "actsub/parallel.hpp"
#include "actsub/rng.hpp"

namespace actsub {

/// N gradient rows with the provenance needed to replay them. `points`
/// is empty for sets imported from external CSVs, where only the
/// gradients are known.
struct GradientSampleSet {
  Matrix gradients;  // N x m
  Matrix points;     // N x m, or empty for external sets
  std::int64_t seed = 0;
  std::optional<InputDensity> density;
  GradientSource source = GradientSource::external();

  std::size_t count() const { return gradients.rows(); }
  std::size_t dimension() const { return gradients.cols(); }

  void validate() const {
    if (gradients.rows() < 1) throw std::invalid_argument("sample set: needs N >= 1 rows");
    if (!points.empty() &&
        (points.rows() != gradients.rows() || points.cols() != gradients.cols()))
      throw std::invalid_argument("sample set: points/gradients shapes differ");
    for (double v : gradients.data())
      if (!std::isfinite(v)) throw std::invalid_argument("sample set: non-finite gradient entry");
    for (double v : points.data())
      if (!std::isfinite(v)) throw std::invalid_argument("sample set: non-finite point entry");
  }

  json provenance() const {
    json j{{"seed", seed}, {"source", source.to_json()}};
    j["density"] = density ? density->to_json() : json(nullptr);
    j["N"] = gradients.rows();
    j["m"] = gradients.cols();
    return j;
  }
};

/// Draws N i.i.d. rows from the density. Row j comes from stream
/// (seed, j), so the result is independent of evaluation order.
inline Matrix draw_points(const InputDensity& density, std::size_t n, std::int64_t seed) {
  if (n < 1) throw std::invalid_argument("draw_points: N must be >= 1");
  const std::size_t m = density.dimension;
  Matrix points(n, m);
  parallel_for(n, [&](std::size_t j) {
    RngStream rng(seed, stream_id::kPoints + j);
    auto row = points.row(j);
    if (density.kind == DensityKind::UniformHypercube)
      for (std::size_t i = 0; i < m; ++i) row[i] = rng.uniform_symmetric();
    else
      for (std::size_t i = 0; i < m; ++i) row[i] = rng.gaussian();
  });
  return points;
}

/// Draws points and evaluates the gradient at each, per the source.
/// Rows may be evaluated concurrently; assembly is by sample index.
inline GradientSampleSet sample_gradients(const Model& model, const InputDensity& density,
                                          std::size_t n, std::int64_t seed,
                                          const GradientSource& source) {
  if (model.dimension() != density.dimension)
    throw std::invalid_argument("sample_gradients: model dimension " +
                                std::to_string(model.dimension()) + " != density dimension " +
                                std::to_string(density.dimension));
  GradientSampleSet set;
  set.points = draw_points(density, n, seed);
  set.gradients = Matrix(n, density.dimension);
  set.seed = seed;
  set.density = density;
  set.source = source;
  parallel_for(n, [&](std::size_t j) {
    Vector g;
    try {
      g = evaluate_gradient(model, set.points.row(j), source);
    } catch (const std::exception& e) {
      throw std::runtime_error("sample " + std::to_string(j) + ": " + e.what());
    }
    auto row = set.gradients.row(j);
    for (std::size_t i = 0; i < g.size(); ++i) row[i] = g[i];
  });
  set.validate();
  return set;
}

inline GradientSampleSet sample_gradients(const Model& model, std::size_t n, std::int64_t seed,
                                          const GradientSource& source = GradientSource::exact()) {
  return sample_gradients(model, model.density(), n, seed, source);
}

/// CSV of the gradient rows (header g1..gm) plus a JSON sidecar carrying
/// seed, density, and source.
inline void save_gradient_samples(const GradientSampleSet& set, const std::string& csv_path,
                                  const std::string& sidecar_path) {
  std::vector<std::string> header(set.dimension());
  for (std::size_t j = 0; j < header.size(); ++j) header[j] = "g" + std::to_string(j + 1);
  write_csv_matrix(csv_path, set.gradients, header);
  json meta{{"schema_version", 1}};
  meta.update(set.provenance());
  write_text_file(sidecar_path, meta.dump(2) + "\n");
}

/// Loads a gradient CSV. Without a sidecar the set is marked external,
/// which is how rows produced by outside simulations enter the pipeline.
inline GradientSampleSet load_gradient_samples(const std::string& csv_path,
                                               const std::string& sidecar_path = "") {
  GradientSampleSet set;
  set.gradients = read_csv_matrix(csv_path);
  if (!sidecar_path.empty()) {
    const json meta = json::parse(read_text_file(sidecar_path));
    set.seed = meta.value("seed", std::int64_t{0});
    if (meta.contains("density") && !meta["density"].is_null())
      set.density = InputDensity::from_json(meta["density"]);
    if (meta.contains("source")) set.source = GradientSource::from_json(meta["source"]);
  }
  set.validate();
  return set;
}

}  // namespace actsub
