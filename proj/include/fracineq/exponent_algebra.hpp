// Sharp Young constants, dual exponents and the exponent bookkeeping of the
// Renyi-entropy-power reformulation of the multi-function Young inequality.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/fractional_structures.hpp"

namespace fracineq {

enum class Regime {
  direct,   ///< every exponent in (1, inf)
  reverse,  ///< every exponent in (0, 1)
};

inline const char* to_string(Regime r) noexcept { return r == Regime::direct ? "direct" : "reverse"; }

/// Hoelder conjugate p/(p-1). Infinity maps to 1; p = 1 has no finite dual.
/// Negative inputs (duals of exponents in (0,1)) map back into (0,1).
inline double dual_exponent(double p) {
  if (std::isnan(p) || p == 0.0) throw std::domain_error("dual exponent needs p != 0");
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) throw std::domain_error("dual exponent of p = 1 is infinite");
  return p / (p - 1.0);
}

/// C_p = sqrt(p^{1/p} / |p'|^{1/p'}). The endpoints p = 1 and p = inf take
/// their limiting value 1.
inline double sharp_constant(double p) {
  if (!(p > 0.0)) throw std::domain_error("sharp constant needs p > 0");
  if (p == 1.0 || std::isinf(p)) return 1.0;
  const double q = dual_exponent(p);
  return std::exp(0.5 * (std::log(p) / p - std::log(std::abs(q)) / q));
}

inline Regime regime_of(double p) {
  if (!(p > 0.0) || p == 1.0 || !std::isfinite(p))
    throw std::domain_error("exponent " + std::to_string(p) + " is not in (0,1) or (1,inf)");
  return p > 1.0 ? Regime::direct : Regime::reverse;
}

/// Shannon entropy (natural log) of a probability vector; 0 log 0 = 0.
inline double discrete_entropy(std::span<const double> w) {
  double total = 0.0, h = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument("probability vector has a negative entry");
    total += x;
    if (x > 0.0) h -= x * std::log(x);
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probability vector does not sum to 1");
  return h;
}

/// Exponents {p_s}, r for one instance of the conjectured inequality on a
/// d-regular hypergraph, with every derived quantity precomputed.
class ExponentSystem {
 public:
  static constexpr double kConstraintTolerance = 1e-10;

  static ExponentSystem build(const Hypergraph& h, std::vector<double> p, double r) {
    const auto d = regular_degree(h);
    if (!d || *d == 0) throw std::invalid_argument("exponent system needs a regular hypergraph");
    if (p.size() != h.size()) throw std::invalid_argument("exponent system needs one p per edge");
    const Regime regime = regime_of(r);
    for (double ps : p)
      if (regime_of(ps) != regime) throw std::invalid_argument("exponents p_s and r lie on different sides of 1");

    ExponentSystem es(h, std::move(p), r, regime, *d);
    if (std::abs(es.constraint_residual()) > es.constraint_scale() * kConstraintTolerance)
      throw std::invalid_argument("exponents violate sum_s 1/p_s = |S| - d/r' (residual " +
                                  std::to_string(es.constraint_residual()) + ")");
    return es;
  }

  const Hypergraph& hypergraph() const noexcept { return h_; }
  const std::vector<double>& p() const noexcept { return p_; }
  const std::vector<double>& p_dual() const noexcept { return p_dual_; }
  double r() const noexcept { return r_; }
  double r_dual() const noexcept { return r_dual_; }
  Regime regime() const noexcept { return regime_; }
  int d() const noexcept { return d_; }
  double L_r() const noexcept { return L_r_; }
  const std::vector<double>& kappa() const noexcept { return kappa_; }
  const std::vector<double>& lambda() const noexcept { return lambda_; }

  /// Magnitude of the terms in the constraint; the tolerance scales with it
  /// once exponents approach 0.
  double constraint_scale() const {
    double s = 1.0;
    for (double ps : p_) s += 1.0 / ps;
    return std::max(1.0, s);
  }

  /// sum_s 1/p_s - (|S| - d/r')
  double constraint_residual() const {
    double s = 0.0;
    for (double ps : p_) s += 1.0 / ps;
    return s - (static_cast<double>(h_.size()) - d_ / r_dual_);
  }

 private:
  ExponentSystem(const Hypergraph& h, std::vector<double> p, double r, Regime regime, int d)
      : h_(h), p_(std::move(p)), r_(r), r_dual_(dual_exponent(r)), regime_(regime), d_(d) {
    const double edges = static_cast<double>(h_.size());
    L_r_ = r_ * edges - (r_ - 1.0) * d_;
    for (double ps : p_) {
      p_dual_.push_back(dual_exponent(ps));
      kappa_.push_back(r_ / L_r_ / ps);
      lambda_.push_back(r_dual_ / d_ / p_dual_.back());
    }
  }

  Hypergraph h_;
  std::vector<double> p_;
  std::vector<double> p_dual_;
  double r_;
  double r_dual_;
  Regime regime_;
  int d_;
  double L_r_ = 0.0;
  std::vector<double> kappa_;
  std::vector<double> lambda_;
};

/// Common p solving sum_s 1/p = |S| - d/r' on a regular hypergraph.
inline double solve_symmetric_p(const Hypergraph& h, double r) {
  const auto d = regular_degree(h);
  if (!d || *d == 0) throw std::invalid_argument("symmetric exponent needs a regular hypergraph");
  const double edges = static_cast<double>(h.size());
  const double denom = edges - *d / dual_exponent(r);
  if (!(denom > 0.0)) throw std::domain_error("no positive symmetric exponent for this r");
  const double p = edges / denom;
  if (regime_of(p) != regime_of(r)) throw std::domain_error("symmetric exponent falls on the other side of 1");
  return p;
}

enum class BoundSide {
  upper,  ///< log V_r(Y_[M]) <= value (direct regime)
  lower,  ///< log V_r(Y_[M]) >= value (reverse regime)
};

struct PrelimitBound {
  double value;
  BoundSide side;
};

/// Right side of the entropy-power form of the conjecture:
///   sum_s lambda_s log V_{p_s}(Y_s) + (L_r - d)/(d(1-r)) log r
///   + H(lambda) - log d + L_r/(d(1-r)) [H(kappa) - log L_r],
/// where log_v[s] = log V_{p_s}(Y_s).
inline PrelimitBound prelimit_rhs(const ExponentSystem& es, std::span<const double> log_v) {
  if (log_v.size() != es.hypergraph().size()) throw std::invalid_argument("prelimit needs one log V per edge");
  const double r = es.r(), d = es.d(), L = es.L_r();
  double value = 0.0;
  for (std::size_t k = 0; k < log_v.size(); ++k) value += es.lambda()[k] * log_v[k];
  value += (L - d) / (d * (1.0 - r)) * std::log(r);
  value += discrete_entropy(es.lambda()) - std::log(d);
  value += L / (d * (1.0 - r)) * (discrete_entropy(es.kappa()) - std::log(L));
  return {value, es.regime() == Regime::direct ? BoundSide::upper : BoundSide::lower};
}

}  // namespace fracineq
