#pragma once

#include <memory>
#include <string>

#include "actsub/elliptic.hpp"
#include "actsub/models.hpp"

namespace actsub {

namespace detail {
/// Reads a positive integer field; nlohmann would otherwise cast negative
/// values straight to huge unsigned sizes.
inline std::size_t positive_size(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  const auto v = j[key].get<std::int64_t>();
  if (v < 1) throw std::invalid_argument(std::string("model JSON: '") + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}
}  // namespace detail

/// Builds a model from its JSON description. Supported kinds:
///   {"kind":"quadratic","case":1,"m":10,"seed":42}
///   {"kind":"quadratic","A":[[...],[...]]}
///   {"kind":"linear","c":[...]}
///   {"kind":"elliptic","beta":1.0,"m":100,"grid":512}
inline std::unique_ptr<Model> model_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "quadratic") {
    if (j.contains("A")) {
      const auto rows = j["A"].get<std::vector<Vector>>();
      if (rows.empty()) throw std::invalid_argument("quadratic model: A is empty");
      Matrix a(rows.size(), rows.front().size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != a.cols())
          throw std::invalid_argument("quadratic model: A rows have unequal lengths");
        for (std::size_t c = 0; c < a.cols(); ++c) a(i, c) = rows[i][c];
      }
      return std::make_unique<QuadraticModel>(std::move(a));
    }
    const int case_id = j.at("case");
    const std::size_t m = detail::positive_size(j, "m", 10);
    const std::int64_t seed = j.value("seed", std::int64_t{0});
    return std::make_unique<QuadraticModel>(build_quadratic_case(case_id, m, seed));
  }
  if (kind == "linear") {
    auto c = j.at("c").get<Vector>();
    const std::string density = j.value("density", std::string("uniform_hypercube"));
    return std::make_unique<LinearModel>(std::move(c),
                                         density == "standard_gaussian"
                                             ? DensityKind::StandardGaussian
                                             : DensityKind::UniformHypercube);
  }
  if (kind == "elliptic") {
    const double beta = j.at("beta");
    const std::size_t m = detail::positive_size(j, "m", 100);
    const std::size_t grid = detail::positive_size(j, "grid", 512);
    return std::make_unique<EllipticModel>(build_kl(beta, m, grid));
  }
  throw std::invalid_argument("model_from_json: unknown kind '" + kind + "'");
}

inline std::unique_ptr<Model> model_from_json_file(const std::string& path) {
  return model_from_json(json::parse(read_text_file(path)));
}

}  // namespace actsub
