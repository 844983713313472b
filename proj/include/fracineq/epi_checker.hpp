// Fractional entropy power inequality on independent Gaussian vectors.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fracineq/fractional_structures.hpp"
#include "fracineq/report.hpp"
#include "fracineq/sharpness.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

/// Covariances of M independent Gaussian vectors in R^n.
struct GaussianEnsemble {
  std::vector<Eigen::MatrixXd> covariances;

  int dimension() const { return static_cast<int>(covariances.front().rows()); }

  void validate() const {
    if (covariances.empty()) throw std::invalid_argument("ensemble is empty");
    for (const auto& k : covariances) {
      if (k.rows() != covariances.front().rows()) throw std::invalid_argument("covariances have different sizes");
      validate_pd(k);
    }
  }
};

/// e^{2h/n} = 2πe det(Σ)^{1/n}.
inline double gaussian_entropy_power(const Eigen::MatrixXd& sigma) {
  validate_pd(sigma);
  return 2.0 * std::numbers::pi * std::numbers::e * det_root(sigma);
}

/// N(X_1 + ... + X_M) against Σ_s β_s N(Σ_{j∈s} X_j).
inline InequalityReport check_epi(const GaussianEnsemble& ens, const FractionalPartition& fp) {
  ens.validate();
  const auto& h = fp.hypergraph();
  if (static_cast<std::size_t>(h.ground_size()) != ens.covariances.size())
    throw std::invalid_argument("hypergraph ground size differs from the ensemble size");
  const int n = ens.dimension();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  for (const auto& k : ens.covariances) total += k;
  std::vector<double> terms, edge_powers;
  for (std::size_t s = 0; s < h.size(); ++s) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    for (int i : h[s]) sum += ens.covariances[i - 1];
    edge_powers.push_back(gaussian_entropy_power(sum));
    terms.push_back(fp[s] * edge_powers.back());
  }
  const double lhs = gaussian_entropy_power(total), rhs = pairwise_sum(terms);
  auto rep = make_report("epi", lhs, rhs, lhs - rhs, 1e-12 * std::max(1.0, lhs));
  rep.details["edgeEntropyPowers"] = edge_powers;
  rep.details["weights"] = fp.weights();
  rep.details["proportional"] = proportional_matrices(ens.covariances);
  return rep;
}

}  // namespace fracineq
