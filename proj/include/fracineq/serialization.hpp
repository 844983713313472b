// JSON encodings of hypergraphs, partitions and densities.
#pragma once

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/densities.hpp"
#include "fracineq/fractional_structures.hpp"
#include "fracineq/report.hpp"

namespace fracineq {

inline json hypergraph_to_json(const Hypergraph& h) {
  return json{{"M", h.ground_size()}, {"edges", h.edges()}};
}

/// Accepts {"M": m, "edges": [[...], ...]} or a bare edge list (M is then the
/// largest vertex mentioned).
inline Hypergraph hypergraph_from_json(const json& j) {
  const json& edges = j.is_array() ? j : j.at("edges");
  std::vector<Edge> list;
  int largest = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!edges[k].is_array()) throw std::invalid_argument("edge " + std::to_string(k) + " is not a list");
    Edge e;
    for (const auto& v : edges[k]) {
      if (!v.is_number_integer()) throw std::invalid_argument("edge " + std::to_string(k) + " has a non-integer vertex");
      e.push_back(v.get<int>());
      largest = std::max(largest, e.back());
    }
    list.push_back(std::move(e));
  }
  const int m = j.is_object() && j.contains("M") ? j.at("M").get<int>() : largest;
  return {m, std::move(list)};
}

inline json partition_to_json(const FractionalPartition& fp) {
  json j{{"weights", fp.weights()}};
  if (fp.exact_weights()) {
    std::vector<std::string> exact;
    for (const auto& q : *fp.exact_weights())
      exact.push_back(std::to_string(q.numerator()) + "/" + std::to_string(q.denominator()));
    j["exact"] = exact;
  }
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, int n) {
  Eigen::MatrixXd m(n, n);
  if (j.is_number()) {
    if (n != 1) throw std::invalid_argument("scalar covariance needs dimension 1");
    m(0, 0) = j.get<double>();
    return m;
  }
  std::vector<double> flat;
  for (const auto& row : j) {
    if (row.is_array())
      for (const auto& v : row) flat.push_back(v.get<double>());
    else
      flat.push_back(row.get<double>());
  }
  if (flat.size() != static_cast<std::size_t>(n * n)) throw std::invalid_argument("covariance has the wrong size");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = flat[a * n + b];
  return m;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < m.cols(); ++b) flat.push_back(m(a, b));
  return flat;
}

inline json density_to_json(const Density& f) {
  if (const auto* g = std::get_if<GaussianDensity>(&f)) {
    return json{{"type", "gaussian"},
                {"mean", std::vector<double>(g->mean().data(), g->mean().data() + g->dimension())},
                {"covariance", matrix_to_json(g->covariance())}};
  }
  const auto& grid = std::get<GridDensity>(f);
  const int n = grid.dimension();
  std::vector<double> origin(grid.origin().begin(), grid.origin().begin() + n);
  std::vector<std::size_t> shape(grid.shape().begin(), grid.shape().begin() + n);
  return json{{"type", "grid"}, {"n", n},          {"origin", origin},
              {"step", grid.step()}, {"shape", shape}, {"values", grid.values()}};
}

/// Density specs:
///   {"type":"gaussian","mean":[...],"covariance":[row-major or nested]}
///   {"type":"grid","n":..,"origin":[..],"step":h,"shape":[..],"values":[..]}
///   {"type":"grid","csv":"path"}            (relative to `base_dir`)
///   {"type":"uniform","a":..,"b":..,"step":h}
///   {"type":"mixture","step":h,"window":[lo,hi],
///    "components":[{"weight":w,"mean":m,"variance":v}, ...]}   (1D)
///   {"type":"discretized-gaussian","mean":[..],"covariance":..,"step":h}
inline Density density_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian" || type == "discretized-gaussian") {
    std::vector<double> mean;
    if (j.at("mean").is_number())
      mean.push_back(j.at("mean").get<double>());
    else
      mean = j.at("mean").get<std::vector<double>>();
    const int n = static_cast<int>(mean.size());
    GaussianDensity g(Eigen::Map<Eigen::VectorXd>(mean.data(), n), matrix_from_json(j.at("covariance"), n));
    if (type == "gaussian") return g;
    return discretize(g, j.at("step").get<double>(), j.value("windowSd", 8.0));
  }
  if (type == "grid") {
    if (j.contains("csv")) {
      std::filesystem::path p = j.at("csv").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return load_grid_csv(p.string());
    }
    const int n = j.at("n").get<int>();
    const auto origin = j.at("origin").get<std::vector<double>>();
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (static_cast<int>(origin.size()) != n || static_cast<int>(shape.size()) != n)
      throw std::invalid_argument("grid origin/shape length must equal n");
    return GridDensity(n, {origin[0], n == 2 ? origin[1] : 0.0}, j.at("step").get<double>(),
                       {shape[0], n == 2 ? shape[1] : 1}, j.at("values").get<std::vector<double>>());
  }
  if (type == "uniform") return uniform_grid(j.at("a").get<double>(), j.at("b").get<double>(), j.at("step").get<double>());
  if (type == "mixture") {
    const double h = j.at("step").get<double>();
    const auto window = j.at("window").get<std::vector<double>>();
    if (window.size() != 2 || !(window[1] > window[0])) throw std::invalid_argument("mixture window must be [lo, hi]");
    const auto cells = static_cast<std::size_t>(std::llround((window[1] - window[0]) / h));
    std::vector<double> values(cells, 0.0);
    for (const auto& c : j.at("components")) {
      const double w = c.at("weight").get<double>(), m = c.at("mean").get<double>(), v = c.at("variance").get<double>();
      if (!(w >= 0.0) || !(v > 0.0)) throw std::invalid_argument("mixture component needs weight >= 0 and variance > 0");
      for (std::size_t k = 0; k < cells; ++k) {
        const double x = window[0] + (static_cast<double>(k) + 0.5) * h;
        values[k] += w * std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(kTwoPi * v);
      }
    }
    return GridDensity::normalized(1, {window[0], 0.0}, h, {cells, 1}, std::move(values));
  }
  throw std::invalid_argument("unknown density type '" + type + "'");
}

}  // namespace fracineq
