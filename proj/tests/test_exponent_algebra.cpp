#include <gtest/gtest.h>

#include <cmath>

#include "fracineq/exponent_algebra.hpp"
#include "fracineq/support.hpp"

using namespace fracineq;

namespace {

Hypergraph pairwise3() { return {3, {{1, 2}, {1, 3}, {2, 3}}}; }

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

/// Random exponents on the regime side of r satisfying the edge constraint.
std::vector<double> random_exponents(StreamRng& rng, const Hypergraph& h, double r) {
  const int d = *regular_degree(h);
  const double target = static_cast<double>(h.size()) - d / dual_exponent(r);
  const std::size_t e = h.size();
  for (;;) {
    std::vector<double> w(e);
    for (auto& x : w) x = 0.1 + rng.uniform();
    const double total = sum(w);
    std::vector<double> p(e);
    bool ok = true;
    for (std::size_t k = 0; k < e; ++k) {
      const double u = r > 1 ? target * w[k] / total : 1.0 + (target - e) * w[k] / total;
      ok = ok && (r > 1 ? u < 0.999 : u > 1.001);
      p[k] = 1.0 / u;
    }
    if (ok) return p;
  }
}

}  // namespace

TEST(DualExponent, Examples) {
  EXPECT_DOUBLE_EQ(dual_exponent(2.0), 2.0);
  EXPECT_DOUBLE_EQ(dual_exponent(1.5), 3.0);
  EXPECT_DOUBLE_EQ(dual_exponent(0.5), -1.0);
  EXPECT_EQ(dual_exponent(INFINITY), 1.0);
  EXPECT_THROW(dual_exponent(1.0), std::domain_error);
  EXPECT_THROW(dual_exponent(0.0), std::domain_error);
}

TEST(DualExponent, IsAnInvolution) {
  StreamRng rng(3);
  for (int t = 0; t < 100; ++t) {
    double p = rng.uniform() < 0.5 ? 0.01 + 0.98 * rng.uniform() : 1.01 + 20 * rng.uniform();
    EXPECT_NEAR(dual_exponent(dual_exponent(p)), p, 1e-12 * std::max(1.0, p));
  }
}

TEST(SharpConstant, Examples) {
  EXPECT_EQ(sharp_constant(2.0), 1.0);
  EXPECT_NEAR(sharp_constant(1.5), 0.953185, 1e-6);
  EXPECT_NEAR(sharp_constant(1.5), 0.9531842930, 1e-10);
  EXPECT_NEAR(sharp_constant(0.5), 0.5, 1e-15);
  EXPECT_EQ(sharp_constant(1.0), 1.0);
  EXPECT_THROW(sharp_constant(-1.0), std::domain_error);
}

TEST(SharpConstant, DualProductIsOne) {
  for (int k = 1; k <= 50; ++k) {
    const double r = 1.0 + 49.0 * k / 50.0;
    EXPECT_NEAR(sharp_constant(dual_exponent(r)) * sharp_constant(r), 1.0, 1e-12) << r;
  }
}

TEST(SharpConstant, OrderAroundTwo) {
  for (double p = 1.0; p <= 2.0; p += 0.01) EXPECT_LE(sharp_constant(p), 1.0 + 1e-15) << p;
  for (double p = 2.0; p <= 60.0; p += 0.25) EXPECT_GE(sharp_constant(p), 1.0 - 1e-15) << p;
  EXPECT_NEAR(sharp_constant(1.0 + 1e-9), 1.0, 1e-6);
}

TEST(DiscreteEntropy, Examples) {
  EXPECT_NEAR(discrete_entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}), std::log(3.0), 1e-15);
  EXPECT_EQ(discrete_entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(discrete_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.039720771, 1e-9);
  EXPECT_THROW(discrete_entropy(std::vector<double>{0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(discrete_entropy(std::vector<double>{1.5, -0.5}), std::invalid_argument);
}

TEST(ExponentSystem, PairwiseSymmetric) {
  const auto es = ExponentSystem::build(pairwise3(), {1.5, 1.5, 1.5}, 2.0);
  EXPECT_EQ(es.regime(), Regime::direct);
  EXPECT_EQ(es.d(), 2);
  EXPECT_DOUBLE_EQ(es.L_r(), 4.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(es.kappa()[k], 1.0 / 3, 1e-15);
    EXPECT_NEAR(es.lambda()[k], 1.0 / 3, 1e-15);
  }
}

TEST(ExponentSystem, ClassicalYoung) {
  // 1/p + 1/q = 1/r + 1
  const double p = 1.25, r = 3.0;
  const double q = 1.0 / (1.0 / r + 1.0 - 1.0 / p);
  const auto es = ExponentSystem::build(Hypergraph::singletons(2), {p, q}, r);
  EXPECT_LT(std::abs(es.constraint_residual()), 1e-12);
}

TEST(ExponentSystem, Rejections) {
  EXPECT_THROW(ExponentSystem::build(pairwise3(), {1.5, 1.5, 1.5}, 3.0), std::invalid_argument);
  EXPECT_THROW(ExponentSystem::build(pairwise3(), {1.5, 0.5, 1.5}, 2.0), std::invalid_argument);
  EXPECT_THROW(ExponentSystem::build(Hypergraph(2, {{1}, {1, 2}}), {1.5, 1.5}, 2.0), std::invalid_argument);
  EXPECT_THROW(ExponentSystem::build(pairwise3(), {1.5, 1.5}, 2.0), std::invalid_argument);
  EXPECT_THROW(ExponentSystem::build(pairwise3(), {1.5, 1.5, 1.5}, 1.0), std::domain_error);
}

TEST(ExponentSystem, KappaLambdaAreProbabilityVectors) {
  StreamRng rng(17);
  const std::vector<Hypergraph> hs{pairwise3(), leave_one_out(4), Hypergraph::k_subsets(4, 2),
                                   Hypergraph::singletons(3)};
  for (int t = 0; t < 200; ++t) {
    const auto& h = hs[t % hs.size()];
    const double r = t % 2 ? 1.05 + 8 * rng.uniform() : 0.05 + 0.9 * rng.uniform();
    const auto es = ExponentSystem::build(h, random_exponents(rng, h, r), r);
    EXPECT_NEAR(sum(es.kappa()), 1.0, 1e-12);
    EXPECT_NEAR(sum(es.lambda()), 1.0, 1e-12);
    for (double x : es.kappa()) EXPECT_GE(x, 0.0);
    for (double x : es.lambda()) EXPECT_GE(x, 0.0);
    EXPECT_NEAR(es.L_r(), r * (h.size() - es.d() / es.r_dual()), 1e-12 * es.L_r());
  }
}

TEST(ExponentSystem, KappaOverLambdaTendsToOneAsRVanishes) {
  const auto h = pairwise3();
  const std::vector<double> lambda{0.5, 0.3, 0.2};
  double previous = INFINITY;
  for (double r : {1e-2, 1e-4, 1e-6}) {
    const double rd = dual_exponent(r);
    std::vector<double> p;
    for (double l : lambda) p.push_back(1.0 / (1.0 - l * 2 / rd));
    const auto es = ExponentSystem::build(h, p, r);
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(es.lambda()[k], lambda[k], 1e-12);
      worst = std::max(worst, std::abs(es.kappa()[k] / es.lambda()[k] - 1.0));
    }
    EXPECT_LT(worst, previous);
    EXPECT_LT(worst, 10 * r);
    previous = worst;
  }
}

TEST(SymmetricExponent, Examples) {
  EXPECT_NEAR(solve_symmetric_p(pairwise3(), 2.0), 1.5, 1e-15);
  EXPECT_NEAR(solve_symmetric_p(pairwise3(), 0.5), 0.6, 1e-15);
  const double r = 2.5;
  const double p = solve_symmetric_p(Hypergraph::singletons(4), r);
  EXPECT_NEAR(4.0 / p, 4.0 - 1.0 / dual_exponent(r), 1e-14);
  EXPECT_THROW(solve_symmetric_p(Hypergraph(2, {{1}, {1, 2}}), 2.0), std::invalid_argument);
}

TEST(Prelimit, UniformSpecialization) {
  const Hypergraph h(2, {{1, 2}, {1, 2}});
  for (double r : {0.3, 2.0, 5.0}) {
    const auto es = ExponentSystem::build(h, {r, r}, r);
    EXPECT_NEAR(es.L_r(), es.d(), 1e-14);
    const std::vector<double> v{0.7, 0.7};
    const auto b = prelimit_rhs(es, v);
    EXPECT_NEAR(b.value, 0.7, 1e-13);
    EXPECT_EQ(b.side, r > 1 ? BoundSide::upper : BoundSide::lower);
  }
}

TEST(Prelimit, MatchesLogOfConstantsRoute) {
  StreamRng rng(29);
  const std::vector<Hypergraph> hs{pairwise3(), leave_one_out(4), Hypergraph::k_subsets(4, 2),
                                   Hypergraph::singletons(2)};
  for (int t = 0; t < 200; ++t) {
    const auto& h = hs[t % hs.size()];
    const double r = t % 2 ? 1.05 + 8 * rng.uniform() : 0.05 + 0.9 * rng.uniform();
    const auto es = ExponentSystem::build(h, random_exponents(rng, h, r), r);
    const int n = 1 + t % 3;
    std::vector<double> log_v(h.size());
    for (auto& v : log_v) v = 4 * rng.uniform() - 1;
    // log of C_r^{-n} Π_s [C_{p_s}^n ||Y_s||_{p_s}]^{1/d} with log||Y_s||_p = -(n/2p') log V_p.
    double log_rhs = -n * std::log(sharp_constant(r));
    for (std::size_t k = 0; k < h.size(); ++k)
      log_rhs += (n * std::log(sharp_constant(es.p()[k])) - n / (2 * es.p_dual()[k]) * log_v[k]) / es.d();
    EXPECT_NEAR(prelimit_rhs(es, log_v).value, -2 * es.r_dual() / n * log_rhs, 1e-10);
  }
}
