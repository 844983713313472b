// Both sides of the multi-function Young inequality, its fractional form and
// the fractional Hoelder inequality on concrete densities.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/densities.hpp"
#include "fracineq/exponent_algebra.hpp"
#include "fracineq/fractional_structures.hpp"
#include "fracineq/report.hpp"
#include "fracineq/serialization.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

inline constexpr double kClosedFormTolerance = 1e-9;
inline constexpr double kGridTolerance = 1e-4;

struct YoungInstance {
  std::vector<Density> densities;
  Hypergraph hypergraph;
  std::vector<double> p;
  double r = 2.0;
  std::optional<FractionalPartition> partition;
};

inline bool all_gaussian(std::span<const Density> fs) {
  return std::all_of(fs.begin(), fs.end(), [](const Density& f) { return is_gaussian(f); });
}

inline double default_tolerance(const YoungInstance& inst) {
  return all_gaussian(inst.densities) ? kClosedFormTolerance : kGridTolerance;
}

/// Parameters covered by the Hausdorff-Young argument: r >= 2 and every
/// p_s in [1, 2].
inline bool in_theorem_range(std::span<const double> p, double r) {
  return r >= 2.0 && std::all_of(p.begin(), p.end(), [](double x) { return x >= 1.0 && x <= 2.0; });
}

inline bool check_theorem_range(const ExponentSystem& es) { return in_theorem_range(es.p(), es.r()); }

inline json instance_to_json(const YoungInstance& inst) {
  json j{{"hypergraph", hypergraph_to_json(inst.hypergraph)}, {"p", inst.p}, {"r", inst.r}};
  j["densities"] = json::array();
  for (const auto& f : inst.densities) j["densities"].push_back(density_to_json(f));
  if (inst.partition) j["partition"] = partition_to_json(*inst.partition);
  return j;
}

inline std::string instance_digest(const YoungInstance& inst) { return sha256_hex(instance_to_json(inst).dump()); }

namespace detail {

struct YoungSides {
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  std::vector<double> edge_log_norms;
  double renormalization = 0.0;
};

inline int common_dimension(std::span<const Density> fs) {
  if (fs.empty()) throw std::invalid_argument("instance has no densities");
  const int n = dimension(fs.front());
  const bool gaussian = is_gaussian(fs.front());
  for (const auto& f : fs) {
    if (dimension(f) != n) throw std::invalid_argument("densities have different dimensions");
    if (is_gaussian(f) != gaussian) throw std::invalid_argument("instance mixes Gaussian and grid densities");
  }
  return n;
}

inline double grid_renormalization(const Density& f) {
  const auto* g = std::get_if<GridDensity>(&f);
  return g ? g->renormalization() : 0.0;
}

/// log ||⋆_all f||_r and log of C_r^{-n} Π_s [C_{p_s}^n ||⋆_s f||_{p_s}]^{w_s}.
inline YoungSides young_sides(std::span<const Density> fs, const Hypergraph& h, std::span<const double> p, double r,
                              std::span<const double> w) {
  const int n = common_dimension(fs);
  if (static_cast<std::size_t>(h.ground_size()) != fs.size())
    throw std::invalid_argument("hypergraph ground size differs from the number of densities");
  YoungSides out;
  const Density full = convolve_all(fs);
  out.log_lhs = log_lp_norm(full, r);
  out.renormalization = grid_renormalization(full);
  out.log_rhs = -n * std::log(sharp_constant(r));
  for (std::size_t k = 0; k < h.size(); ++k) {
    std::vector<Density> members;
    for (int i : h[k]) members.push_back(fs[i - 1]);
    const Density conv = convolve_all(members);
    out.renormalization = std::max(out.renormalization, grid_renormalization(conv));
    out.edge_log_norms.push_back(log_lp_norm(conv, p[k]));
    if (w[k] != 0.0) out.log_rhs += w[k] * (n * std::log(sharp_constant(p[k])) + out.edge_log_norms.back());
  }
  return out;
}

inline double signed_margin(Regime regime, double lhs, double rhs) {
  return regime == Regime::direct ? rhs - lhs : lhs - rhs;
}

inline std::vector<Density> coarsened(std::span<const Density> fs) {
  std::vector<Density> out;
  for (const auto& f : fs) out.push_back(coarsen(std::get<GridDensity>(f)));
  return out;
}

inline InequalityReport young_report(const std::string& kind, const YoungInstance& inst, Regime regime,
                                     std::span<const double> w, std::optional<double> tol) {
  const double tolerance = tol.value_or(default_tolerance(inst));
  const auto sides = young_sides(inst.densities, inst.hypergraph, inst.p, inst.r, w);
  const double lhs = std::exp(sides.log_lhs), rhs = std::exp(sides.log_rhs);
  auto rep = make_report(kind, lhs, rhs, signed_margin(regime, lhs, rhs), tolerance);
  rep.details["regime"] = to_string(regime);
  rep.details["theoremBacked"] = in_theorem_range(inst.p, inst.r);
  rep.details["logLhs"] = sides.log_lhs;
  rep.details["logRhs"] = sides.log_rhs;
  rep.details["edgeLogNorms"] = sides.edge_log_norms;
  rep.details["weights"] = std::vector<double>(w.begin(), w.end());
  rep.details["digest"] = instance_digest(inst);

  if (!all_gaussian(inst.densities)) {
    // Step-doubling estimate of the midpoint-rule error (O(h^2)).
    const auto coarse = coarsened(inst.densities);
    const auto sides2 = young_sides(coarse, inst.hypergraph, inst.p, inst.r, w);
    const double margin2 = signed_margin(regime, std::exp(sides2.log_lhs), std::exp(sides2.log_rhs));
    const double err = std::abs(rep.margin - margin2) / 3.0 / std::max(rhs, std::numeric_limits<double>::min());
    rep.details["gridStep"] = std::get<GridDensity>(inst.densities.front()).step();
    rep.details["quadratureError"] = err;
    rep.details["renormalization"] = sides.renormalization;
    if (err > tolerance / 10.0)
      throw PrecisionError("grid too coarse: relative quadrature error estimate " + std::to_string(err) +
                           " exceeds tol/10 = " + std::to_string(tolerance / 10.0));
  }
  return rep;
}

}  // namespace detail

/// ||⋆ f_j||_r against C_r^{-n} Π_s [C_{p_s}^n ||⋆_{j∈s} f_j||_{p_s}]^{1/d};
/// the margin is reversed in the (0,1) regime.
inline InequalityReport check_conjecture(const YoungInstance& inst, std::optional<double> tol = std::nullopt) {
  const auto es = ExponentSystem::build(inst.hypergraph, inst.p, inst.r);
  const std::vector<double> w(inst.hypergraph.size(), 1.0 / es.d());
  auto rep = detail::young_report("young", inst, es.regime(), w, tol);
  rep.details["rPrime"] = es.r_dual();
  rep.details["L_r"] = es.L_r();
  rep.details["kappa"] = es.kappa();
  rep.details["lambda"] = es.lambda();
  rep.details["d"] = es.d();
  return rep;
}

/// Same comparison with exponents β_s from a fractional partition; requires
/// Σ_s β_s/p_s = Σ_s β_s - 1/r'.
inline InequalityReport check_fractional_form(const YoungInstance& inst, std::optional<double> tol = std::nullopt) {
  if (!inst.partition) throw std::invalid_argument("fractional form needs a partition");
  const auto& fp = *inst.partition;
  if (!(fp.hypergraph() == inst.hypergraph)) throw std::invalid_argument("partition is on a different hypergraph");
  if (inst.p.size() != inst.hypergraph.size()) throw std::invalid_argument("fractional form needs one p per edge");
  const Regime regime = regime_of(inst.r);
  for (double ps : inst.p)
    if (regime_of(ps) != regime) throw std::invalid_argument("exponents p_s and r lie on different sides of 1");
  double lhs_sum = 0.0, beta_sum = 0.0;
  for (std::size_t k = 0; k < inst.p.size(); ++k) {
    lhs_sum += fp[k] / inst.p[k];
    beta_sum += fp[k];
  }
  const double residual = lhs_sum - (beta_sum - 1.0 / dual_exponent(inst.r));
  if (std::abs(residual) > ExponentSystem::kConstraintTolerance)
    throw std::invalid_argument("exponents violate sum_s beta_s/p_s = sum_s beta_s - 1/r' (residual " +
                                std::to_string(residual) + ")");
  return detail::young_report("fractional-young", inst, regime, fp.weights(), tol);
}

/// ||Π_j f_j||_r <= Π_s ||Π_{j∈s} f_j||_{q_s}^{γ_s} whenever Σ_s γ_s/q_s = 1/r.
inline InequalityReport check_fractional_holder(std::span<const Density> fs, const FractionalPartition& fp,
                                                std::span<const double> q, double r,
                                                std::optional<double> tol = std::nullopt) {
  const auto& h = fp.hypergraph();
  detail::common_dimension(fs);
  if (static_cast<std::size_t>(h.ground_size()) != fs.size())
    throw std::invalid_argument("hypergraph ground size differs from the number of densities");
  if (q.size() != h.size()) throw std::invalid_argument("Hoelder check needs one q per edge");
  if (!(r > 0.0)) throw std::domain_error("Hoelder check needs r > 0");
  double sum = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!(q[k] > 0.0)) throw std::domain_error("Hoelder exponents must be positive");
    sum += fp[k] / q[k];
  }
  if (std::abs(sum - 1.0 / r) > ExponentSystem::kConstraintTolerance)
    throw std::invalid_argument("exponents violate sum_s gamma_s/q_s = 1/r");

  const double log_lhs = log_lp_norm_of_product(fs, r);
  double log_rhs = 0.0;
  std::vector<double> edge_logs;
  for (std::size_t k = 0; k < h.size(); ++k) {
    std::vector<Density> members;
    for (int i : h[k]) members.push_back(fs[i - 1]);
    edge_logs.push_back(log_lp_norm_of_product(members, q[k]));
    if (fp[k] != 0.0) log_rhs += fp[k] * edge_logs.back();
  }
  const double lhs = std::exp(log_lhs), rhs = std::exp(log_rhs);
  auto rep = make_report("fractional-holder", lhs, rhs, rhs - lhs, tol.value_or(kClosedFormTolerance * std::max(1.0, rhs)));
  rep.details["logLhs"] = log_lhs;
  rep.details["logRhs"] = log_rhs;
  return rep;
}

// ---------------------------------------------------------------------------
// Violation search

using InstanceGenerator = std::function<YoungInstance(StreamRng&)>;

struct ViolationSearch {
  std::size_t trials = 0;
  std::vector<InequalityReport> violations;
  std::size_t precision_flags = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// Runs `trials` instances; trial k draws from the stream (seed, k), so the
/// outcome does not depend on `jobs`. Fractional-form instances are checked
/// when the generator attaches a partition.
inline ViolationSearch search_violations(const InstanceGenerator& generate, std::size_t trials, std::uint64_t seed,
                                         unsigned jobs = 1, std::optional<double> tol = std::nullopt) {
  struct Slot {
    std::optional<InequalityReport> report;
    bool precision = false;
    json instance;
  };
  std::vector<Slot> slots(trials);
  parallel_for(trials, jobs, [&](std::size_t k) {
    StreamRng rng(seed, {k});
    const YoungInstance inst = generate(rng);
    try {
      slots[k].report = inst.partition ? check_fractional_form(inst, tol) : check_conjecture(inst, tol);
      if (!slots[k].report->holds()) slots[k].instance = instance_to_json(inst);
    } catch (const PrecisionError&) {
      slots[k].precision = true;
    }
  });
  ViolationSearch out;
  out.trials = trials;
  for (std::size_t k = 0; k < trials; ++k) {
    if (slots[k].precision) {
      ++out.precision_flags;
      continue;
    }
    auto& rep = *slots[k].report;
    out.worst_margin = std::min(out.worst_margin, rep.margin);
    if (!rep.holds()) {
      rep.details["trial"] = k;
      rep.details["instance"] = std::move(slots[k].instance);
      out.violations.push_back(std::move(rep));
    }
  }
  return out;
}

namespace generators {

inline double uniform(StreamRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// Random orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(StreamRng& rng, int n) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = standard_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// Covariance Q diag(λ) Qᵀ with log-eigenvalues uniform in ±spread, or with
/// eigenvalues spanning `condition` when condition > 1.
inline Eigen::MatrixXd random_covariance(StreamRng& rng, int n, double spread = 1.5, double condition = 1.0) {
  Eigen::VectorXd eig(n);
  for (int i = 0; i < n; ++i) eig(i) = std::exp(uniform(rng, -spread, spread));
  if (condition > 1.0 && n >= 2) {
    const double base = eig(0);
    eig(n - 1) = base / condition;
  }
  const Eigen::MatrixXd q = random_rotation(rng, n);
  Eigen::MatrixXd s = q * eig.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

inline GaussianDensity random_gaussian(StreamRng& rng, int n, double spread = 1.5, double condition = 1.0) {
  Eigen::VectorXd mean(n);
  for (int i = 0; i < n; ++i) mean(i) = standard_normal(rng);
  return {mean, random_covariance(rng, n, spread, condition)};
}

/// Smooth 1D mixture of 1-3 Gaussians on [-window, window] at the given step.
inline GridDensity random_mixture(StreamRng& rng, double step, double window = 7.0) {
  const int parts = 1 + static_cast<int>(rng.uniform() * 3.0);
  const auto cells = static_cast<std::size_t>(std::llround(2.0 * window / step));
  std::vector<double> values(cells, 0.0);
  for (int c = 0; c < parts; ++c) {
    const double w = uniform(rng, 0.2, 1.0), m = uniform(rng, -1.5, 1.5), v = uniform(rng, 0.3, 1.0);
    for (std::size_t k = 0; k < cells; ++k) {
      const double x = -window + (static_cast<double>(k) + 0.5) * step;
      values[k] += w * std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(kTwoPi * v);
    }
  }
  return GridDensity::normalized(1, {-window, 0.0}, step, {cells, 1}, std::move(values));
}

inline InstanceGenerator gaussian(Hypergraph h, std::vector<double> p, double r, int n, double condition = 1.0) {
  return [=](StreamRng& rng) {
    YoungInstance inst{{}, h, p, r, std::nullopt};
    for (int j = 0; j < h.ground_size(); ++j) inst.densities.emplace_back(random_gaussian(rng, n, 1.5, condition));
    return inst;
  };
}

inline InstanceGenerator grid_mixtures(Hypergraph h, std::vector<double> p, double r, double step = 0.02) {
  return [=](StreamRng& rng) {
    YoungInstance inst{{}, h, p, r, std::nullopt};
    for (int j = 0; j < h.ground_size(); ++j) inst.densities.emplace_back(random_mixture(rng, step));
    return inst;
  };
}

}  // namespace generators

}  // namespace fracineq
