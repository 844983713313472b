// Brunn-Minkowski and its fractional form on convex polytopes, homothety
// detection and polytope JSON.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracineq/fractional_structures.hpp"
#include "fracineq/polytope.hpp"
#include "fracineq/report.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

inline constexpr double kHomothetyTolerance = 1e-9;
inline constexpr double kBrunnMinkowskiTolerance = 1e-9;

inline double support_function(const Polytope& a, const Point& u) { return a.support(u); }

/// B = cA + t for some c > 0 and t: compare vertex sets after moving the
/// vertex centroid to 0 and scaling the farthest vertex to distance 1.
inline bool is_homothetic(const Polytope& a, const Polytope& b, double tol = kHomothetyTolerance) {
  if (a.dimension() != b.dimension() || a.size() != b.size()) return false;
  if (a.size() == 1) return true;
  auto normalize = [](const Polytope& k) {
    const Point c = k.vertex_centroid();
    double radius = 0.0;
    for (const auto& v : k.vertices()) radius = std::max(radius, (v - c).norm());
    std::vector<Point> out;
    for (const auto& v : k.vertices()) out.push_back((v - c) / radius);
    return out;
  };
  const auto na = normalize(a), nb = normalize(b);
  for (const auto& u : na) {
    bool found = false;
    for (const auto& v : nb) found = found || (u - v).norm() <= tol;
    if (!found) return false;
  }
  return true;
}

inline double volume_root(const Polytope& k) { return std::pow(k.volume(), 1.0 / k.dimension()); }

/// |Σ K_j|^{1/n} against Σ_s β_s |Σ_{j∈s} K_j|^{1/n}; margin = LHS - RHS.
inline InequalityReport check_fractional_bm(const std::vector<Polytope>& ks, const FractionalPartition& fp,
                                            double tol = kBrunnMinkowskiTolerance) {
  if (ks.empty()) throw std::invalid_argument("Brunn-Minkowski check needs at least one body");
  const auto& h = fp.hypergraph();
  if (static_cast<std::size_t>(h.ground_size()) != ks.size())
    throw std::invalid_argument("hypergraph ground size differs from the number of bodies");
  const int n = ks.front().dimension();
  for (const auto& k : ks)
    if (k.dimension() != n) throw std::invalid_argument("bodies have different dimensions");

  const double lhs = volume_root(minkowski_sum(ks));
  std::vector<double> edge_volumes, terms;
  for (std::size_t s = 0; s < h.size(); ++s) {
    std::vector<Polytope> members;
    for (int i : h[s]) members.push_back(ks[i - 1]);
    const Polytope sum = minkowski_sum(members);
    edge_volumes.push_back(sum.volume());
    terms.push_back(fp[s] * volume_root(sum));
  }
  const double rhs = pairwise_sum(terms);
  const double scaled_tol = tol * std::max(1.0, lhs);
  auto rep = make_report("fractional-bm", lhs, rhs, lhs - rhs, scaled_tol);
  bool homothetic = true;
  for (const auto& k : ks) homothetic = homothetic && is_homothetic(ks.front(), k);
  rep.details["dimension"] = n;
  rep.details["edgeVolumes"] = edge_volumes;
  rep.details["bodyVolumes"] = [&] {
    std::vector<double> v;
    for (const auto& k : ks) v.push_back(k.volume());
    return v;
  }();
  rep.details["homothetic"] = homothetic;
  rep.details["weights"] = fp.weights();
  return rep;
}

inline json polytope_to_json(const Polytope& k) {
  json verts = json::array();
  for (const auto& v : k.vertices()) verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return json{{"vertices", verts}};
}

/// {"vertices": [[...], ...]}, {"box": {"lo": [...], "hi": [...]}},
/// {"regularPolygon": {"k", "radius", "center"}} or a bare vertex list.
inline Polytope polytope_from_json(const json& j) {
  auto to_point = [](const json& a) {
    if (!a.is_array() || a.empty()) throw std::invalid_argument("polytope vertex must be a nonempty list");
    Point p(static_cast<Eigen::Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) p(static_cast<Eigen::Index>(k)) = a[k].get<double>();
    return p;
  };
  if (j.is_object() && j.contains("box")) return Polytope::box(to_point(j["box"].at("lo")), to_point(j["box"].at("hi")));
  if (j.is_object() && j.contains("regularPolygon")) {
    const auto& g = j["regularPolygon"];
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    if (g.contains("center")) c = to_point(g["center"]);
    return Polytope::regular_polygon(g.at("k").get<int>(), g.at("radius").get<double>(), c);
  }
  const json& verts = j.is_array() ? j : j.at("vertices");
  if (!verts.is_array() || verts.empty()) throw std::invalid_argument("polytope needs a nonempty vertex list");
  std::vector<Point> pts;
  for (const auto& v : verts) pts.push_back(to_point(v));
  return Polytope(std::move(pts));
}

namespace generators {

/// Hull of 1-8 uniform points in a random box; n = 1 gives a segment.
inline Polytope random_polytope(StreamRng& rng, int n, int max_points = 8) {
  const int count = n + 1 + static_cast<int>(rng.uniform() * (max_points - n));
  Point shift(n), stretch(n);
  for (int k = 0; k < n; ++k) {
    shift(k) = 4.0 * rng.uniform() - 2.0;
    stretch(k) = 0.2 + 2.0 * rng.uniform();
  }
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    Point q(n);
    for (int k = 0; k < n; ++k) q(k) = shift(k) + stretch(k) * (rng.uniform() - 0.5);
    pts.push_back(q);
  }
  return Polytope(std::move(pts));
}

/// c A + t with c in [0.1, 3] and t uniform in [-3, 3]^n.
inline Polytope random_homothet(StreamRng& rng, const Polytope& a) {
  Point t(a.dimension());
  for (int k = 0; k < a.dimension(); ++k) t(k) = 6.0 * rng.uniform() - 3.0;
  return translate(scale(a, 0.1 + 2.9 * rng.uniform()), t);
}

}  // namespace generators

}  // namespace fracineq
