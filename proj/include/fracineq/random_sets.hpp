// Random convex sets in the plane: sampling models, Minkowski averages, the
// Aumann expectation through support functions, Vitale's inequality and the
// monotone law of large numbers.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/convex_geometry.hpp"
#include "fracineq/report.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

/// Planar random convex set laws with bounded samples.
struct RandomSetModel {
  enum class Kind { rotated_segment, random_polygon, scaled_body };

  Kind kind = Kind::rotated_segment;
  std::string name = "rotated-segment";
  double length = 1.0;                           // rotated-segment
  int points = 4;                                // random-polygon
  Eigen::Vector2d lo{0.0, 0.0}, hi{1.0, 1.0};    // random-polygon box
  std::optional<Polytope> base;                  // scaled-body
  std::vector<double> scale_values;              // scaled-body, uniform on these
  double scale_lo = 1.0, scale_hi = 1.0;         // scaled-body when scale_values is empty

  static RandomSetModel rotated_segment(double length = 1.0) {
    RandomSetModel m;
    m.length = length;
    return m;
  }

  static RandomSetModel random_polygon(int k, Eigen::Vector2d lo = {0, 0}, Eigen::Vector2d hi = {1, 1}) {
    if (k < 1) throw std::invalid_argument("random polygon needs at least one point");
    RandomSetModel m;
    m.kind = Kind::random_polygon;
    m.name = "random-polygon";
    m.points = k;
    m.lo = lo;
    m.hi = hi;
    return m;
  }

  static RandomSetModel scaled_body(Polytope body, std::vector<double> values, std::string name = "scaled-body") {
    if (body.dimension() != 2) throw std::invalid_argument("random set models are planar");
    for (double c : values)
      if (!(c >= 0.0)) throw std::invalid_argument("scale values must be nonnegative");
    RandomSetModel m;
    m.kind = Kind::scaled_body;
    m.name = std::move(name);
    m.base = std::move(body);
    m.scale_values = std::move(values);
    return m;
  }

  /// Segment of the given length centred at the origin, direction θ ~ U[0, π).
  Polytope sample(StreamRng& rng) const {
    switch (kind) {
      case Kind::rotated_segment: {
        const double t = std::numbers::pi * rng.uniform();
        const Eigen::Vector2d u = 0.5 * length * Eigen::Vector2d(std::cos(t), std::sin(t));
        return Polytope::segment(Point(-u), Point(u));
      }
      case Kind::random_polygon: {
        std::vector<Point> pts;
        for (int k = 0; k < points; ++k) {
          Eigen::Vector2d x;
          for (int a = 0; a < 2; ++a) x(a) = lo(a) + (hi(a) - lo(a)) * rng.uniform();
          pts.emplace_back(x);
        }
        return Polytope(std::move(pts));
      }
      case Kind::scaled_body: {
        double c;
        if (!scale_values.empty()) {
          c = scale_values[std::min(scale_values.size() - 1,
                                    static_cast<std::size_t>(rng.uniform() * static_cast<double>(scale_values.size())))];
        } else {
          c = scale_lo + (scale_hi - scale_lo) * rng.uniform();
        }
        return scale(*base, c);
      }
    }
    throw std::logic_error("unknown random set model");
  }
};

/// Models exercised by the default test suite and the CLI.
inline std::vector<RandomSetModel> builtin_models() {
  const Polytope square = Polytope::box(Point::Constant(2, -0.5), Point::Constant(2, 0.5));
  const Polytope triangle({Point(Eigen::Vector2d(0, 0)), Point(Eigen::Vector2d(1, 0)), Point(Eigen::Vector2d(0.3, 0.8))});
  auto scaled_triangle = RandomSetModel::scaled_body(triangle, {}, "scaled-triangle");
  scaled_triangle.scale_lo = 0.5;
  scaled_triangle.scale_hi = 1.5;
  return {RandomSetModel::rotated_segment(1.0), RandomSetModel::random_polygon(4),
          RandomSetModel::scaled_body(square, {1.0, 2.0}, "scaled-square"),
          RandomSetModel::scaled_body(square, {1.0}, "fixed-square"), scaled_triangle};
}

inline RandomSetModel model_by_name(const std::string& name) {
  const auto models = builtin_models();
  for (const auto& m : models)
    if (m.name == name) return m;
  std::string known;
  for (const auto& m : models) known += (known.empty() ? "" : ", ") + m.name;
  throw std::invalid_argument("unknown random set model '" + name + "' (known: " + known + ")");
}

inline Polytope minkowski_average(const std::vector<Polytope>& samples) {
  if (samples.empty()) throw std::invalid_argument("Minkowski average of an empty list");
  return scale(minkowski_sum(samples), 1.0 / static_cast<double>(samples.size()));
}

inline double hausdorff_distance(const Polytope& a, const Polytope& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("Hausdorff distance across dimensions");
  double d = 0.0;
  for (const auto& v : a.vertices()) d = std::max(d, b.distance(v));
  for (const auto& v : b.vertices()) d = std::max(d, a.distance(v));
  return d;
}

namespace detail {

/// Clip a convex polygon (counter-clockwise) to {x : <u, x> <= h}.
inline std::vector<Eigen::Vector2d> clip(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& u, double h) {
  std::vector<Eigen::Vector2d> out;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto& p = poly[k];
    const auto& q = poly[(k + 1) % poly.size()];
    const double fp = u.dot(p) - h, fq = u.dot(q) - h;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) out.push_back(p + fp / (fp - fq) * (q - p));
  }
  return out;
}

inline Eigen::Vector2d grid_direction(std::size_t k, std::size_t d) {
  const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d);
  return {std::cos(t), std::sin(t)};
}

}  // namespace detail

/// Support-function estimate of E A on D equispaced directions and the
/// polygon they cut out.
struct AumannEstimate {
  std::vector<double> support;        // mean of s_A(u_k)
  std::vector<double> support_error;  // standard error per direction
  std::vector<double> edge_lengths;   // length of the polygon edge with normal u_k
  std::optional<Polytope> body;
  std::size_t samples = 0;

  const Polytope& polygon() const { return *body; }
};

/// Intersection of the halfplanes <u_k, x> <= h_k, clipped to a large box.
inline Polytope halfplane_polygon(const std::vector<double>& h) {
  const std::size_t d = h.size();
  double bound = 1.0;
  for (double x : h) bound = std::max(bound, 4.0 * std::abs(x));
  std::vector<Eigen::Vector2d> poly{{-bound, -bound}, {bound, -bound}, {bound, bound}, {-bound, bound}};
  for (std::size_t k = 0; k < d && !poly.empty(); ++k) poly = detail::clip(poly, detail::grid_direction(k, d), h[k]);
  if (poly.empty()) throw std::runtime_error("support estimates cut out an empty polygon");
  std::vector<Point> pts(poly.begin(), poly.end());
  return Polytope(std::move(pts));
}

inline constexpr std::uint64_t kAumannStream = 0x61756d616eULL;

/// Ê s_A(u_k) over N samples drawn from streams (seed, i); D >= 8, N >= 100.
inline AumannEstimate aumann_expectation(const RandomSetModel& model, std::size_t directions, std::size_t samples,
                                         std::uint64_t seed, unsigned jobs = 1) {
  if (directions < 8) throw std::invalid_argument("Aumann estimate needs at least 8 directions");
  if (samples < 100) throw std::invalid_argument("Aumann estimate needs at least 100 samples");
  std::vector<std::vector<double>> values(directions, std::vector<double>(samples));
  parallel_for(samples, jobs, [&](std::size_t i) {
    StreamRng rng(seed, {kAumannStream, i});
    const Polytope a = model.sample(rng);
    for (std::size_t k = 0; k < directions; ++k) values[k][i] = a.support(detail::grid_direction(k, directions));
  });
  AumannEstimate est;
  est.samples = samples;
  for (const auto& v : values) {
    const auto me = mean_and_stderr(v);
    est.support.push_back(me.mean);
    est.support_error.push_back(me.std_error);
  }
  est.body = halfplane_polygon(est.support);
  est.edge_lengths.assign(directions, 0.0);
  const auto& vs = est.body->vertices();
  for (std::size_t e = 0; e < vs.size(); ++e) {
    const Eigen::Vector2d p = vs[e], q = vs[(e + 1) % vs.size()];
    const Eigen::Vector2d nrm(q.y() - p.y(), p.x() - q.x());
    double angle = std::atan2(nrm.y(), nrm.x());
    if (angle < 0) angle += 2.0 * std::numbers::pi;
    const double pos = angle * static_cast<double>(directions) / (2.0 * std::numbers::pi);
    const auto k = static_cast<std::size_t>(std::llround(pos)) % directions;
    if (std::abs(pos - std::round(pos)) < 1e-6) est.edge_lengths[k] += (q - p).norm();
  }
  return est;
}

inline constexpr std::size_t kDefaultDirections = 360;

/// |EA|^{1/2} against E|A|^{1/2} on shared samples; the standard error is
/// the delta-method error of the difference.
inline InequalityReport check_vitale(const RandomSetModel& model, std::size_t samples, std::uint64_t seed,
                                     unsigned jobs = 1, std::size_t directions = kDefaultDirections) {
  const auto est = aumann_expectation(model, directions, samples, seed, jobs);
  const double area = est.polygon().volume();
  const double lhs = std::sqrt(area);
  std::vector<double> roots(samples), influence(samples);
  parallel_for(samples, jobs, [&](std::size_t i) {
    StreamRng rng(seed, {kAumannStream, i});
    const Polytope a = model.sample(rng);
    roots[i] = std::sqrt(a.volume());
    double d_area = 0.0;
    for (std::size_t k = 0; k < directions; ++k)
      if (est.edge_lengths[k] > 0.0)
        d_area += est.edge_lengths[k] * (a.support(detail::grid_direction(k, directions)) - est.support[k]);
    influence[i] = lhs > 0.0 ? d_area / (2.0 * lhs) : 0.0;
  });
  const auto rhs = mean_and_stderr(roots);
  for (std::size_t i = 0; i < samples; ++i) influence[i] -= roots[i] - rhs.mean;
  const auto diff = mean_and_stderr(influence);
  auto rep = make_report("vitale", lhs, rhs.mean, lhs - rhs.mean, 1e-9);
  rep.std_error = diff.std_error;
  rep.equality = std::abs(rep.margin) <= std::max(rep.tol, 3.0 * diff.std_error);
  rep.details["model"] = model.name;
  rep.details["samples"] = samples;
  rep.details["directions"] = directions;
  rep.details["aumannArea"] = area;
  rep.details["meanRootStdError"] = rhs.std_error;
  return rep;
}

struct LLNExperimentResult {
  std::string model;
  std::vector<int> M_values;
  std::vector<double> means;
  std::vector<double> std_errors;
  std::vector<double> step_std_errors;  // stderr of mean(M+1) - mean(M), paired
  std::vector<double> hausdorff_means;  // mean ρ_H(L_M, EK estimate)
  double aumann_volume_root = 0.0;
  double aumann_std_error = 0.0;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  bool monotone = true;
  std::vector<int> monotonicity_breaks;  // M with mean(M+1) < mean(M) - 3 stderr
};

inline json to_json_value(const LLNExperimentResult& r) {
  return json{{"model", r.model},
              {"M", r.M_values},
              {"means", r.means},
              {"stdErrors", r.std_errors},
              {"stepStdErrors", r.step_std_errors},
              {"hausdorffMeans", r.hausdorff_means},
              {"aumannVolumeRoot", r.aumann_volume_root},
              {"aumannStdError", r.aumann_std_error},
              {"seed", r.seed},
              {"replicates", r.replicates},
              {"monotone", r.monotone},
              {"monotonicityBreaks", r.monotonicity_breaks}};
}

inline constexpr std::uint64_t kLLNStream = 0x6c6c6eULL;
inline constexpr std::size_t kHausdorffReplicates = 200;

/// E|L_M|^{1/2} for M = 1..M_max with L_M = (A_1 + ... + A_M)/M. Replicate r
/// draws A_i from stream (seed, r, i), so every L_M in a replicate shares its
/// first samples with the smaller ones.
inline LLNExperimentResult lln_monotonicity(const RandomSetModel& model, int m_max, std::size_t replicates,
                                            std::uint64_t seed, unsigned jobs = 1,
                                            std::size_t aumann_samples = 20000) {
  if (m_max < 2) throw std::invalid_argument("law of large numbers experiment needs M_max >= 2");
  if (replicates < 2) throw std::invalid_argument("law of large numbers experiment needs at least 2 replicates");
  const auto mm = static_cast<std::size_t>(m_max);
  const auto ek = aumann_expectation(model, kDefaultDirections, aumann_samples, seed, jobs);
  const std::size_t h_reps = std::min(replicates, kHausdorffReplicates);

  std::vector<std::vector<double>> roots(mm, std::vector<double>(replicates));
  std::vector<std::vector<double>> dists(mm, std::vector<double>(h_reps));
  parallel_for(replicates, jobs, [&](std::size_t r) {
    std::optional<Polytope> sum;
    for (std::size_t i = 0; i < mm; ++i) {
      StreamRng rng(seed, {kLLNStream, r, i});
      Polytope a = model.sample(rng);
      sum = sum ? minkowski_sum(*sum, a) : a;
      const double m = static_cast<double>(i + 1);
      roots[i][r] = std::sqrt(sum->volume()) / m;
      if (r < h_reps) dists[i][r] = hausdorff_distance(scale(*sum, 1.0 / m), ek.polygon());
    }
  });

  LLNExperimentResult out;
  out.model = model.name;
  out.seed = seed;
  out.replicates = replicates;
  out.aumann_volume_root = std::sqrt(ek.polygon().volume());
  {
    // Delta method through the polygon edge lengths, support errors treated as independent.
    double var = 0.0;
    for (std::size_t k = 0; k < ek.support.size(); ++k)
      var += std::pow(ek.edge_lengths[k] * ek.support_error[k], 2);
    out.aumann_std_error = out.aumann_volume_root > 0.0 ? std::sqrt(var) / (2.0 * out.aumann_volume_root) : 0.0;
  }
  for (std::size_t i = 0; i < mm; ++i) {
    const auto me = mean_and_stderr(roots[i]);
    out.M_values.push_back(static_cast<int>(i + 1));
    out.means.push_back(me.mean);
    out.std_errors.push_back(me.std_error);
    out.hausdorff_means.push_back(mean_and_stderr(dists[i]).mean);
  }
  for (std::size_t i = 0; i + 1 < mm; ++i) {
    std::vector<double> step(replicates);
    for (std::size_t r = 0; r < replicates; ++r) step[r] = roots[i + 1][r] - roots[i][r];
    const auto me = mean_and_stderr(step);
    out.step_std_errors.push_back(me.std_error);
    if (out.means[i + 1] < out.means[i] - 3.0 * me.std_error) {
      out.monotone = false;
      out.monotonicity_breaks.push_back(static_cast<int>(i + 1));
    }
  }
  return out;
}

}  // namespace fracineq
