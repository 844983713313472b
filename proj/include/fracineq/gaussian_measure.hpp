// Standard Gaussian measure of polytopes, Φ and Φ⁻¹, the Ehrhard inequality
// and its fractional form.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/convex_geometry.hpp"
#include "fracineq/fractional_structures.hpp"
#include "fracineq/report.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Φ⁻¹ by Acklam's rational approximation (relative error 1.15e-9) followed
/// by one Halley step.
inline double std_normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("normal quantile needs q in (0, 1)");
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                           1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                           6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                           -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                           3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (q < low) {
    const double t = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  } else if (q <= 1.0 - low) {
    const double u = q - 0.5, t = u * u;
    x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  } else {
    const double t = std::sqrt(-2.0 * std::log1p(-q));
    x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  }
  // Φ(x) - q evaluated through the smaller tail.
  const double e = x < 0 ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - q
                         : (1.0 - q) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e / std_normal_pdf(x);
  return x - u / (1.0 + 0.5 * x * u);
}

struct MonteCarloOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  /// PrecisionError when the reported standard error exceeds this.
  double max_std_error = std::numeric_limits<double>::infinity();
};

/// N standard normal points in R^n. Block k of 4096 points is drawn from the
/// stream (seed, n, k), so the cloud does not depend on the worker count.
class GaussianSampleCloud {
 public:
  static constexpr std::size_t kBlock = 4096;

  GaussianSampleCloud(int n, std::size_t samples, std::uint64_t seed, unsigned jobs = 1)
      : n_(n), points_(n, static_cast<Eigen::Index>(samples)) {
    if (n < 1 || n > 3) throw std::invalid_argument("sample cloud dimension must be 1, 2 or 3");
    if (samples == 0) throw std::invalid_argument("sample cloud needs at least one point");
    parallel_for(blocks(), jobs, [&](std::size_t k) {
      StreamRng rng(seed, {0x67617573ULL, static_cast<std::uint64_t>(n), k});
      const std::size_t end = std::min(samples, (k + 1) * kBlock);
      for (std::size_t i = k * kBlock; i < end; ++i)
        for (int a = 0; a < n; ++a) points_(a, static_cast<Eigen::Index>(i)) = standard_normal(rng);
    });
  }

  int dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  std::size_t blocks() const noexcept { return (size() + kBlock - 1) / kBlock; }
  const Eigen::MatrixXd& points() const noexcept { return points_; }

 private:
  int n_;
  Eigen::MatrixXd points_;
};

struct GaussianMeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;  // 0 for exact values
};

namespace detail {

inline bool inside(const Polytope& k, const double* x) {
  const auto& a = k.facet_normals();
  const auto& b = k.facet_offsets();
  const double slack = Polytope::kEps * k.scale();
  for (Eigen::Index f = 0; f < a.rows(); ++f) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(f, j) * x[j];
    if (s > b(f) + slack) return false;
  }
  return true;
}

inline double exact_measure_1d(const Polytope& k) {
  const double lo = k.vertices().front()(0), hi = k.vertices().back()(0);
  // Φ(hi) - Φ(lo) on the side with the smaller tails.
  if (lo >= 0) return 0.5 * (std::erfc(lo / std::numbers::sqrt2) - std::erfc(hi / std::numbers::sqrt2));
  if (hi <= 0) return 0.5 * (std::erfc(-hi / std::numbers::sqrt2) - std::erfc(-lo / std::numbers::sqrt2));
  return 1.0 - 0.5 * std::erfc(hi / std::numbers::sqrt2) - 0.5 * std::erfc(-lo / std::numbers::sqrt2);
}

/// Joint hit statistics of several bodies on a shared cloud: hit[i] and
/// both[i][j] are counts of points in body i and in bodies i and j.
struct JointHits {
  std::vector<std::uint64_t> hit;
  std::vector<std::vector<std::uint64_t>> both;
  std::size_t samples = 0;
};

inline JointHits joint_hits(const std::vector<Polytope>& bodies, const GaussianSampleCloud& cloud, unsigned jobs) {
  const std::size_t m = bodies.size();
  // Per block: m single counts followed by the m x m joint counts.
  std::vector<std::vector<std::uint64_t>> per_block(cloud.blocks(), std::vector<std::uint64_t>(m + m * m, 0));
  const double* data = cloud.points().data();
  const auto n = static_cast<std::size_t>(cloud.dimension());
  parallel_for(cloud.blocks(), jobs, [&](std::size_t k) {
    const std::size_t end = std::min(cloud.size(), (k + 1) * GaussianSampleCloud::kBlock);
    auto& counts = per_block[k];
    std::vector<std::size_t> in;
    for (std::size_t i = k * GaussianSampleCloud::kBlock; i < end; ++i) {
      in.clear();
      for (std::size_t b = 0; b < m; ++b)
        if (bodies[b].full_dimensional() && inside(bodies[b], data + i * n)) in.push_back(b);
      for (std::size_t a : in) {
        ++counts[a];
        for (std::size_t b : in) ++counts[m + a * m + b];
      }
    }
  });
  JointHits out;
  out.samples = cloud.size();
  out.hit.assign(m, 0);
  out.both.assign(m, std::vector<std::uint64_t>(m, 0));
  for (const auto& counts : per_block)
    for (std::size_t a = 0; a < m; ++a) {
      out.hit[a] += counts[a];
      for (std::size_t b = 0; b < m; ++b) out.both[a][b] += counts[m + a * m + b];
    }
  return out;
}

/// Σ_i c_i Φ⁻¹(γ(K_i)) with a delta-method standard error that accounts for
/// the shared samples. n = 1 is exact.
struct QuantileCombination {
  std::vector<double> measures;
  std::vector<double> measure_errors;
  std::vector<double> quantiles;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

inline QuantileCombination quantile_combination(const std::vector<Polytope>& bodies, const std::vector<double>& coeffs,
                                                const MonteCarloOptions& opt) {
  QuantileCombination out;
  const std::size_t m = bodies.size();
  const int n = bodies.front().dimension();
  for (const auto& k : bodies) {
    if (k.dimension() != n) throw std::invalid_argument("bodies have different dimensions");
    if (!k.full_dimensional()) throw std::invalid_argument("Gaussian checks need bodies of positive volume");
  }
  std::vector<double> grad(m, 0.0);
  if (n == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      out.measures.push_back(exact_measure_1d(bodies[i]));
      out.measure_errors.push_back(0.0);
    }
  } else {
    const GaussianSampleCloud cloud(n, opt.samples, opt.seed, opt.jobs);
    const auto hits = joint_hits(bodies, cloud, opt.jobs);
    out.samples = hits.samples;
    const auto total = static_cast<double>(hits.samples);
    for (std::size_t i = 0; i < m; ++i) {
      const double p = static_cast<double>(hits.hit[i]) / total;
      out.measures.push_back(p);
      out.measure_errors.push_back(std::sqrt(p * (1.0 - p) / total));
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double p = out.measures[i];
      if (p <= 0.0 || p >= 1.0)
        throw PrecisionError("Gaussian measure estimate " + std::to_string(p) + " of body " + std::to_string(i) +
                             " is degenerate; increase the sample budget");
      grad[i] = coeffs[i] / std_normal_pdf(std_normal_quantile(p));
    }
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double cov = static_cast<double>(hits.both[i][j]) / total - out.measures[i] * out.measures[j];
        var += grad[i] * grad[j] * cov;
      }
    out.std_error = std::sqrt(std::max(var, 0.0) / total);
  }
  std::vector<double> terms;
  for (std::size_t i = 0; i < m; ++i) {
    out.quantiles.push_back(std_normal_quantile(out.measures[i]));
    terms.push_back(coeffs[i] * out.quantiles.back());
  }
  out.value = pairwise_sum(terms);
  if (out.std_error > opt.max_std_error)
    throw PrecisionError("standard error " + std::to_string(out.std_error) + " exceeds the requested " +
                         std::to_string(opt.max_std_error));
  return out;
}

inline void add_measure_details(InequalityReport& rep, const QuantileCombination& q) {
  rep.details["measures"] = q.measures;
  rep.details["measureStdErrors"] = q.measure_errors;
  rep.details["samples"] = q.samples;
  rep.details["exact"] = q.samples == 0;
}

}  // namespace detail

/// γ_n(A); exact through Φ for n = 1, Monte Carlo otherwise. Lower-dimensional
/// bodies have measure 0.
inline GaussianMeasureEstimate gaussian_measure(const Polytope& a, const MonteCarloOptions& opt = {}) {
  if (!a.full_dimensional()) return {0.0, 0.0, 0};
  if (a.dimension() == 1) return {detail::exact_measure_1d(a), 0.0, 0};
  const GaussianSampleCloud cloud(a.dimension(), opt.samples, opt.seed, opt.jobs);
  const auto hits = detail::joint_hits({a}, cloud, opt.jobs);
  const double total = static_cast<double>(hits.samples);
  const double p = static_cast<double>(hits.hit[0]) / total;
  GaussianMeasureEstimate est{p, std::sqrt(p * (1.0 - p) / total), hits.samples};
  if (est.std_error > opt.max_std_error)
    throw PrecisionError("standard error " + std::to_string(est.std_error) + " exceeds the requested " +
                         std::to_string(opt.max_std_error));
  return est;
}

/// Φ⁻¹γ(λA + (1-λ)B) against λΦ⁻¹γ(A) + (1-λ)Φ⁻¹γ(B), on common samples.
inline InequalityReport check_ehrhard(const Polytope& a, const Polytope& b, double lam, const MonteCarloOptions& opt = {}) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw std::invalid_argument("Ehrhard weight must lie in [0, 1]");
  const Polytope mix = minkowski_sum(scale(a, lam), scale(b, 1.0 - lam));
  const auto q = detail::quantile_combination({mix, a, b}, {1.0, -lam, -(1.0 - lam)}, opt);
  const double lhs = q.quantiles[0], rhs = lam * q.quantiles[1] + (1.0 - lam) * q.quantiles[2];
  auto rep = make_report("ehrhard", lhs, rhs, q.value, q.samples == 0 ? 1e-9 : 0.0);
  rep.std_error = q.std_error;
  rep.equality = std::abs(q.value) <= std::max(rep.tol, 3.0 * q.std_error);
  rep.details["lambda"] = lam;
  detail::add_measure_details(rep, q);
  return rep;
}

/// Bodies K_j with weights λ_j (summing to 1) and a fractional partition.
struct GaussianBodyInstance {
  std::vector<Polytope> bodies;
  std::vector<double> lambdas;
  FractionalPartition partition;

  void validate() const {
    if (bodies.empty()) throw std::invalid_argument("instance has no bodies");
    if (lambdas.size() != bodies.size()) throw std::invalid_argument("need one weight per body");
    if (static_cast<std::size_t>(partition.hypergraph().ground_size()) != bodies.size())
      throw std::invalid_argument("hypergraph ground size differs from the number of bodies");
    double total = 0.0;
    for (double l : lambdas) {
      if (!(l >= 0.0)) throw std::invalid_argument("body weights must be nonnegative");
      total += l;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("body weights must sum to 1");
    for (const auto& k : bodies)
      if (!k.full_dimensional()) throw std::invalid_argument("bodies must have positive volume");
  }

  double edge_weight(std::size_t s) const {
    double l = 0.0;
    for (int i : partition.hypergraph()[s]) l += lambdas[i - 1];
    return l;
  }

  /// Σ_{j∈s} (λ_j/λ_s) K_j.
  Polytope edge_body(std::size_t s) const {
    const double ls = edge_weight(s);
    std::vector<Polytope> parts;
    for (int i : partition.hypergraph()[s]) parts.push_back(scale(bodies[i - 1], lambdas[i - 1] / ls));
    return minkowski_sum(parts);
  }

  Polytope combination() const {
    std::vector<Polytope> parts;
    for (std::size_t j = 0; j < bodies.size(); ++j) parts.push_back(scale(bodies[j], lambdas[j]));
    return minkowski_sum(parts);
  }

  /// Σ_s β_s λ_s · edge_body(s) over edges with λ_s > 0.
  Polytope edge_decomposition() const {
    std::vector<Polytope> parts;
    for (std::size_t s = 0; s < partition.hypergraph().size(); ++s) {
      const double ls = edge_weight(s);
      if (ls > 0.0 && partition[s] > 0.0) parts.push_back(scale(edge_body(s), partition[s] * ls));
    }
    return minkowski_sum(parts);
  }
};

/// Φ⁻¹γ(Σ λ_j K_j) against Σ_s β_s λ_s Φ⁻¹γ(Σ_{j∈s} (λ_j/λ_s) K_j); edges
/// with λ_s = 0 contribute nothing.
inline InequalityReport check_fractional_gaussian(const GaussianBodyInstance& inst, const MonteCarloOptions& opt = {}) {
  inst.validate();
  std::vector<Polytope> bodies{inst.combination()};
  std::vector<double> coeffs{1.0};
  std::vector<std::size_t> used, skipped;
  for (std::size_t s = 0; s < inst.partition.hypergraph().size(); ++s) {
    const double ls = inst.edge_weight(s);
    if (ls == 0.0) {
      skipped.push_back(s);
      continue;
    }
    used.push_back(s);
    bodies.push_back(inst.edge_body(s));
    coeffs.push_back(-inst.partition[s] * ls);
  }
  const auto q = detail::quantile_combination(bodies, coeffs, opt);
  const double lhs = q.quantiles[0];
  const double rhs = lhs - q.value;
  auto rep = make_report("fractional-gaussian", lhs, rhs, q.value, q.samples == 0 ? 1e-9 : 0.0);
  rep.std_error = q.std_error;
  rep.equality = std::abs(q.value) <= std::max(rep.tol, 3.0 * q.std_error);
  rep.details["lambdas"] = inst.lambdas;
  rep.details["weights"] = inst.partition.weights();
  rep.details["edgesUsed"] = used;
  rep.details["edgesSkipped"] = skipped;
  detail::add_measure_details(rep, q);
  return rep;
}

}  // namespace fracineq
