// How tight the conjecture is: the log-moment function φ_f, the Gaussian
// reduction for three functions, stationary exponents and the determinant
// inequality they lead to.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/densities.hpp"
#include "fracineq/exponent_algebra.hpp"
#include "fracineq/fractional_structures.hpp"
#include "fracineq/report.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

// ---------------------------------------------------------------------------
// φ_f(p) = log ∫ f^p

inline double phi(const Density& f, double p) {
  if (!(p > 0.0)) throw std::domain_error("phi needs p > 0");
  const double v = p * log_lp_norm(f, p);
  if (!std::isfinite(v)) throw std::domain_error("integral of f^p diverges or vanishes");
  return v;
}

/// φ'(p): closed form for Gaussians, central difference at step 1e-5 p on grids.
inline double phi_derivative(const Density& f, double p) {
  if (const auto* g = std::get_if<GaussianDensity>(&f)) {
    const double n = g->dimension();
    return -0.5 * n * std::log(kTwoPi) - 0.5 * g->log_det() - n / (2.0 * p);
  }
  const double h = 1e-5 * p;
  return (phi(f, p + h) - phi(f, p - h)) / (2.0 * h);
}

/// φ(p) - p φ'(p), the Shannon entropy of the tilted density f^p / ∫ f^p.
inline double phi_legendre(const Density& f, double p) { return phi(f, p) - p * phi_derivative(f, p); }

/// The tilted density f^p / ∫ f^p.
inline Density tilt(const Density& f, double p) {
  if (const auto* g = std::get_if<GaussianDensity>(&f)) return GaussianDensity(g->mean(), g->covariance() / p);
  const auto& grid = std::get<GridDensity>(f);
  std::vector<double> values;
  for (double v : grid.values()) values.push_back(v > 0.0 ? std::pow(v, p) : 0.0);
  return GridDensity::normalized(grid.dimension(), grid.origin(), grid.step(), grid.shape(), std::move(values));
}

struct LogMomentCheck {
  std::vector<double> p;
  std::vector<double> phi;
  std::vector<double> legendre;
  double worst_second_difference = std::numeric_limits<double>::infinity();  // min slope increment
  double worst_first_difference = -std::numeric_limits<double>::infinity();  // max legendre increment
  bool convex = true;
  bool legendre_nonincreasing = true;

  bool holds() const noexcept { return convex && legendre_nonincreasing; }
};

/// Discrete convexity of φ (slope increments >= -1e-8) and monotonicity of
/// φ - pφ' (increments <= 1e-8) on a strictly increasing grid of p.
inline LogMomentCheck check_lemma61(const Density& f, std::span<const double> p_grid, double tol = 1e-8) {
  LogMomentCheck out;
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    if (k > 0 && !(p_grid[k] > p_grid[k - 1])) throw std::invalid_argument("p grid must be strictly increasing");
    out.p.push_back(p_grid[k]);
    out.phi.push_back(phi(f, p_grid[k]));
    out.legendre.push_back(phi_legendre(f, p_grid[k]));
  }
  for (std::size_t k = 1; k + 1 < out.p.size(); ++k) {
    const double left = (out.phi[k] - out.phi[k - 1]) / (out.p[k] - out.p[k - 1]);
    const double right = (out.phi[k + 1] - out.phi[k]) / (out.p[k + 1] - out.p[k]);
    out.worst_second_difference = std::min(out.worst_second_difference, right - left);
  }
  for (std::size_t k = 1; k < out.p.size(); ++k)
    out.worst_first_difference = std::max(out.worst_first_difference, out.legendre[k] - out.legendre[k - 1]);
  out.convex = !(out.worst_second_difference < -tol);
  out.legendre_nonincreasing = !(out.worst_first_difference > tol);
  return out;
}

// ---------------------------------------------------------------------------
// Three one-dimensional Gaussians, pairwise hypergraph

/// Exponents (p, q, t) for the edges {1,2}, {2,3}, {3,1} and r, with
/// 1/p + 1/q + 1/t = 3 - 2/r'.
struct TripleExponents {
  double p, q, t, r;

  static constexpr double kConstraintTolerance = 1e-10;

  void validate() const {
    if (!(r > 1.0)) throw std::invalid_argument("Gaussian reduction needs r > 1");
    for (double x : {p, q, t})
      if (!(x > 1.0)) throw std::invalid_argument("Gaussian reduction needs p, q, t > 1");
    const double residual = 1.0 / p + 1.0 / q + 1.0 / t - (3.0 - 2.0 / dual_exponent(r));
    if (std::abs(residual) > kConstraintTolerance)
      throw std::invalid_argument("exponents violate 1/p + 1/q + 1/t = 3 - 2/r' (residual " +
                                  std::to_string(residual) + ")");
  }

  /// Powers 1/(4p'), 1/(4q'), 1/(4t') of x, y, 2 - x - y.
  std::array<double, 3> powers() const {
    return {0.25 / dual_exponent(p), 0.25 / dual_exponent(q), 0.25 / dual_exponent(t)};
  }

  /// (r'/p')^{1/(4p')} (r'/q')^{1/(4q')} (r'/t')^{1/(4t')}.
  double bound() const {
    const double rd = dual_exponent(r);
    const auto w = powers();
    const std::array<double, 3> duals{dual_exponent(p), dual_exponent(q), dual_exponent(t)};
    double log_b = 0.0;
    for (int k = 0; k < 3; ++k) log_b += w[k] * std::log(rd / duals[k]);
    return std::exp(log_b);
  }
};

/// x^{1/(4p')} y^{1/(4q')} (2-x-y)^{1/(4t')}: the ratio of the two sides for
/// variances with x = (σ2²+σ3²)/Σσ², y = (σ1²+σ3²)/Σσ².
inline double gaussian_young_lhs(const TripleExponents& e, double x, double y) {
  const auto w = e.powers();
  const double z = 2.0 - x - y;
  return std::pow(x, w[0]) * std::pow(y, w[1]) * std::pow(z, w[2]);
}

inline bool in_reduction_region(double x, double y) { return x < 1.0 && y < 1.0 && x + y > 1.0; }

/// Bound minus the left side at (x, y) in the open region x, y < 1 < x + y.
inline double gaussian_young_margin(const TripleExponents& e, double x, double y) {
  e.validate();
  if (!in_reduction_region(x, y)) throw std::invalid_argument("(x, y) lies outside the region x, y < 1 < x + y");
  return e.bound() - gaussian_young_lhs(e, x, y);
}

/// Variances (σ1², σ2², σ3²) mapped to the reduction coordinates.
inline std::array<double, 2> reduction_coordinates(double v1, double v2, double v3) {
  const double s = v1 + v2 + v3;
  return {(v2 + v3) / s, (v1 + v3) / s};
}

struct GaussianYoungSup {
  double sup = 0.0;
  double bound = 0.0;
  double x = 0.0, y = 0.0;  // maximiser in the closed region
  bool interior = false;
  bool sharp = false;
};

/// Supremum of the left side over the region. The objective is log-concave
/// on {x, y, z <= 1, x + y + z = 2}; its free maximiser is (r'/p', r'/q', r'/t').
/// When that point leaves the region the maximum sits on a face x = 1,
/// y = 1 or z = 1 and is found in closed form there.
inline GaussianYoungSup gaussian_young_sup(const TripleExponents& e, double sharp_tol = 1e-9) {
  e.validate();
  const auto w = e.powers();
  const double total = w[0] + w[1] + w[2];
  GaussianYoungSup out;
  out.bound = e.bound();
  auto value = [&](const std::array<double, 3>& c) {
    double lv = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (w[k] == 0.0) continue;
      if (c[k] <= 0.0) return 0.0;
      lv += w[k] * std::log(c[k]);
    }
    return std::exp(lv);
  };
  const std::array<double, 3> star{2 * w[0] / total, 2 * w[1] / total, 2 * w[2] / total};
  if (star[0] < 1.0 && star[1] < 1.0 && star[2] < 1.0) {
    out.sup = value(star);
    out.x = star[0];
    out.y = star[1];
    out.interior = true;
  } else {
    out.sup = -1.0;
    for (int face = 0; face < 3; ++face) {
      const int i = (face + 1) % 3, j = (face + 2) % 3;
      const double wi = w[i], wj = w[j];
      std::array<double, 3> c{};
      c[face] = 1.0;
      c[i] = wi + wj > 0 ? wi / (wi + wj) : 0.5;
      c[j] = 1.0 - c[i];
      const double v = value(c);
      if (v > out.sup) {
        out.sup = v;
        out.x = c[0];
        out.y = c[1];
      }
    }
  }
  out.sharp = std::abs(out.sup - out.bound) <= sharp_tol * out.bound;
  return out;
}

struct TightnessVerdict {
  bool tight = false;
  bool boundary = false;  // r' = min(p', q', t') within 1e-12
};

/// r' < min(p', q', t').
inline TightnessVerdict tightness_condition(const TripleExponents& e) {
  e.validate();
  const double rd = dual_exponent(e.r);
  const double m = std::min({dual_exponent(e.p), dual_exponent(e.q), dual_exponent(e.t)});
  TightnessVerdict v;
  v.boundary = std::abs(rd - m) <= 1e-12 * std::max(1.0, m);
  v.tight = rd < m && !v.boundary;
  return v;
}

struct ScanRow {
  TripleExponents e;
  GaussianYoungSup sup;
  TightnessVerdict tight;
};

/// Exponent sweep over r and the first two reciprocal exponents; t is solved
/// from the constraint and rows with t outside (1, ∞) are skipped.
inline std::vector<ScanRow> sharpness_scan(std::span<const double> rs, std::span<const double> inv_p,
                                           std::span<const double> inv_q) {
  std::vector<ScanRow> rows;
  for (double r : rs)
    for (double a : inv_p)
      for (double b : inv_q) {
        const double c = 3.0 - 2.0 / dual_exponent(r) - a - b;
        if (!(a > 0 && a < 1 && b > 0 && b < 1 && c > 0 && c < 1)) continue;
        const TripleExponents e{1.0 / a, 1.0 / b, 1.0 / c, r};
        rows.push_back({e, gaussian_young_sup(e), tightness_condition(e)});
      }
  return rows;
}

inline constexpr const char* kScanCsvHeader = "p,q,t,r,sup,rhs,sharp,tight";

// ---------------------------------------------------------------------------
// Stationary exponents

struct StationarySolution {
  std::vector<double> p;
  double beta = 0.0;
  std::vector<double> residuals;  // one per edge, then the exponent constraint
  std::size_t iterations = 0;

  double max_residual() const { return *std::max_element(residuals.begin(), residuals.end()); }
};

inline json to_json_value(const StationarySolution& s) {
  return json{{"p", s.p}, {"beta", s.beta}, {"residuals", s.residuals}, {"iterations", s.iterations}};
}

namespace detail {

/// log|u - 1| + log u - (2/n) h(F) at p = 1/u; the stationary equation reads
/// stationary_lhs(u) = β.
inline double stationary_lhs(const Density& f, double u, int n) {
  return std::log(std::abs(u - 1.0)) + std::log(u) - 2.0 * phi_legendre(f, 1.0 / u) / n;
}

/// Root of stationary_lhs(u) = β in the regime interval by Newton steps kept
/// inside a bisection bracket; clamps to the interval end nearest the root
/// when the equation has none inside.
inline double solve_edge(const Density& f, double beta, int n, Regime regime) {
  constexpr double eps = 1e-12;
  double lo = regime == Regime::direct ? eps : 1.0 + eps;
  double hi = regime == Regime::direct ? 1.0 - eps : 2.0;
  auto g = [&](double u) { return stationary_lhs(f, u, n) - beta; };
  double glo = g(lo), ghi = g(hi);
  if (regime == Regime::reverse)
    while ((glo > 0) == (ghi > 0) && hi < 1e12) {
      hi *= 2.0;
      ghi = g(hi);
    }
  if ((glo > 0) == (ghi > 0)) return std::abs(glo) < std::abs(ghi) ? lo : hi;
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gu = g(u);
    if (gu == 0.0) return u;
    if ((gu > 0) == (glo > 0)) {
      lo = u;
      glo = gu;
    } else {
      hi = u;
    }
    const double du = 1e-7 * u;
    const double slope = (g(u + du) - g(u - du)) / (2.0 * du);
    double next = slope != 0.0 ? u - gu / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * u || hi - lo <= 4e-16 * hi) return next;
    u = next;
  }
  return u;
}

}  // namespace detail

/// Exponents p_s solving log(|1 - p_s|/p_s²) = 2h(F_s)/n + β for a common β
/// together with Σ_s 1/p_s = |S| - d/r'. `edge_densities[s]` is the
/// convolution of the densities in edge s; all p_s lie on the side of 1
/// given by `regime`, which must match r.
inline StationarySolution solve_stationary(const std::vector<Density>& edge_densities, const Hypergraph& h, double r,
                                           Regime regime) {
  if (edge_densities.size() != h.size()) throw std::invalid_argument("need one convolved density per edge");
  const auto d = regular_degree(h);
  if (!d) throw std::invalid_argument("hypergraph is not regular");
  if (regime_of(r) != regime) throw std::invalid_argument("requested regime does not match r");
  const int n = dimension(edge_densities.front());
  const double target = static_cast<double>(h.size()) - *d / dual_exponent(r);

  auto excess = [&](double beta, std::vector<double>* us) {
    std::vector<double> u;
    for (const auto& f : edge_densities) u.push_back(detail::solve_edge(f, beta, n, regime));
    if (us) *us = u;
    return pairwise_sum(u) - target;
  };

  // Bracket: scan [-50, 50], then double outwards.
  double span = 50.0;
  std::vector<double> betas, values;
  double lo = 0, hi = 0, flo = 0, fhi = 0;
  bool found = false;
  while (!found && span <= 1e4) {
    betas.clear();
    values.clear();
    for (int k = 0; k <= 100; ++k) {
      betas.push_back(-span + 2.0 * span * k / 100.0);
      values.push_back(excess(betas.back(), nullptr));
    }
    const bool rising = values.back() >= values.front();
    for (std::size_t k = 1; k < values.size(); ++k)
      if (rising ? values[k] < values[k - 1] - 1e-9 : values[k] > values[k - 1] + 1e-9)
        throw PrecisionError("stationary constraint is not monotone in beta near " + std::to_string(betas[k]));
    for (std::size_t k = 1; k < values.size() && !found; ++k)
      if ((values[k - 1] <= 0) != (values[k] <= 0)) {
        lo = betas[k - 1], hi = betas[k], flo = values[k - 1], fhi = values[k];
        found = true;
      }
    span *= 2.0;
  }
  if (!found) throw PrecisionError("no bracket for the stationary multiplier beta");

  StationarySolution sol;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = excess(mid, nullptr);
    ++sol.iterations;
    if ((fm <= 0) == (flo <= 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  sol.beta = std::abs(flo) <= std::abs(fhi) ? lo : hi;
  std::vector<double> u;
  const double constraint = excess(sol.beta, &u);
  for (std::size_t s = 0; s < u.size(); ++s) {
    sol.p.push_back(1.0 / u[s]);
    sol.residuals.push_back(std::abs(detail::stationary_lhs(edge_densities[s], u[s], n) - sol.beta));
  }
  sol.residuals.push_back(std::abs(constraint));
  return sol;
}

/// Convolves the densities of each edge, then solves.
inline StationarySolution solve_stationary_for(std::span<const Density> fs, const Hypergraph& h, double r) {
  std::vector<Density> edge;
  for (const auto& e : h.edges()) {
    std::vector<Density> members;
    for (int i : e) members.push_back(fs[i - 1]);
    edge.push_back(convolve_all(members));
  }
  return solve_stationary(edge, h, r, regime_of(r));
}

/// Closed form for centred Gaussians: 1/p_s = 1 + C v_s with
/// v_s = det(Σ_{j∈s} K_j)^{1/n} and C = -d/(r' Σ_s v_s).
inline std::vector<double> stationary_closed_form_gaussian(const std::vector<Eigen::MatrixXd>& covs, const Hypergraph& h,
                                                           double r) {
  const auto d = regular_degree(h);
  if (!d) throw std::invalid_argument("hypergraph is not regular");
  const int n = static_cast<int>(covs.front().rows());
  std::vector<double> v;
  for (const auto& e : h.edges()) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    for (int i : e) sum += covs[i - 1];
    v.push_back(std::pow(sum.determinant(), 1.0 / n));
  }
  const double c = -*d / (dual_exponent(r) * pairwise_sum(v));
  std::vector<double> p;
  for (double x : v) p.push_back(1.0 / (1.0 + c * x));
  return p;
}

// ---------------------------------------------------------------------------
// det^{1/n}(Σ K_j) >= (1/d) Σ_s det^{1/n}(Σ_{j∈s} K_j)

inline bool proportional_matrices(const std::vector<Eigen::MatrixXd>& ks, double tol = 1e-12) {
  const Eigen::MatrixXd& k0 = ks.front();
  const double n0 = k0.norm();
  for (const auto& k : ks) {
    const double c = k.norm() / n0;
    if ((k - c * k0).norm() > tol * k.norm()) return false;
  }
  return true;
}

inline void validate_pd(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw std::invalid_argument("matrix is not square");
  if ((k - k.transpose()).norm() > 1e-12 * std::max(1.0, k.norm())) throw std::invalid_argument("matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("matrix is not positive definite");
}

inline double det_root(const Eigen::MatrixXd& k) { return std::pow(k.determinant(), 1.0 / static_cast<double>(k.rows())); }

inline InequalityReport check_determinant_inequality(const std::vector<Eigen::MatrixXd>& ks, const Hypergraph& h) {
  if (ks.empty()) throw std::invalid_argument("determinant check needs matrices");
  if (static_cast<std::size_t>(h.ground_size()) != ks.size())
    throw std::invalid_argument("hypergraph ground size differs from the number of matrices");
  const auto d = regular_degree(h);
  if (!d) throw std::invalid_argument("hypergraph is not regular");
  const auto n = ks.front().rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  for (const auto& k : ks) {
    if (k.rows() != n) throw std::invalid_argument("matrices have different sizes");
    validate_pd(k);
    total += k;
  }
  std::vector<double> terms;
  for (const auto& e : h.edges()) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    for (int i : e) sum += ks[i - 1];
    terms.push_back(det_root(sum) / *d);
  }
  const double lhs = det_root(total), rhs = pairwise_sum(terms);
  auto rep = make_report("determinant", lhs, rhs, lhs - rhs, 1e-12 * std::max(1.0, lhs));
  rep.details["proportional"] = proportional_matrices(ks);
  rep.details["d"] = *d;
  return rep;
}

}  // namespace fracineq
