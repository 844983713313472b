#include <gtest/gtest.h>

#include <cmath>

#include "fracineq/gaussian_measure.hpp"

using namespace fracineq;

namespace {

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) p(k++) = x;
  return p;
}

Polytope interval(double a, double b) { return Polytope::segment(pt({a}), pt({b})); }

// Regular 64-gon with the area of the unit disk.
Polytope disk64() {
  const double r = std::sqrt(std::numbers::pi / (32.0 * std::sin(std::numbers::pi / 32.0)));
  return Polytope::regular_polygon(64, r);
}

MonteCarloOptions mc(std::size_t samples, std::uint64_t seed, unsigned jobs = 1) {
  MonteCarloOptions o;
  o.samples = samples;
  o.seed = seed;
  o.jobs = jobs;
  return o;
}

}  // namespace

TEST(NormalQuantile, InvertsTheCdf) {
  for (double q : {1e-300, 1e-20, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1 - 1e-12}) {
    const double x = std_normal_quantile(q);
    const double back = q < 0.5 ? std_normal_cdf(x) : 1.0 - std_normal_cdf(-x);
    EXPECT_NEAR(back / q, 1.0, 1e-12) << q;
  }
  EXPECT_DOUBLE_EQ(std_normal_quantile(0.5), 0.0);
  EXPECT_NEAR(std_normal_quantile(0.975), 1.959963984540054, 1e-13);
  EXPECT_THROW(std_normal_quantile(0.0), std::domain_error);
  EXPECT_THROW(std_normal_quantile(1.0), std::domain_error);
}

TEST(GaussianMeasure, ExactInOneDimension) {
  const auto est = gaussian_measure(interval(-1, 1));
  EXPECT_EQ(est.samples, 0u);
  EXPECT_NEAR(est.value, std::erf(1.0 / std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(gaussian_measure(interval(0, 50)).value, 0.5, 1e-15);
  EXPECT_EQ(gaussian_measure(interval(2, 2)).value, 0.0);
}

TEST(GaussianMeasure, DiskPolygon) {
  const auto est = gaussian_measure(disk64(), mc(1'000'000, 11));
  EXPECT_LE(est.std_error, 5e-4);
  EXPECT_NEAR(est.value, 1.0 - std::exp(-0.5), 3.0 * est.std_error);
}

TEST(GaussianMeasure, HalfPlaneAndProductBox) {
  const auto half = gaussian_measure(Polytope::box(pt({0, -40}), pt({40, 40})), mc(200'000, 3));
  EXPECT_NEAR(half.value, 0.5, 3.0 * half.std_error);
  const auto box = gaussian_measure(Polytope::box(pt({-1, -1, -1}), pt({1, 1, 1})), mc(200'000, 4));
  EXPECT_NEAR(box.value, std::pow(std::erf(1.0 / std::sqrt(2.0)), 3), 3.0 * box.std_error);
}

TEST(GaussianMeasure, LowerDimensionalBodiesHaveZeroMeasure) {
  EXPECT_EQ(gaussian_measure(Polytope::segment(pt({-1, 0}), pt({1, 0}))).value, 0.0);
}

TEST(GaussianMeasure, IndependentOfJobs) {
  const auto a = gaussian_measure(disk64(), mc(50'000, 9, 1));
  const auto b = gaussian_measure(disk64(), mc(50'000, 9, 4));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(GaussianMeasure, RequestedErrorIsEnforced) {
  auto opt = mc(1000, 1);
  opt.max_std_error = 1e-4;
  EXPECT_THROW(gaussian_measure(disk64(), opt), PrecisionError);
}

TEST(Ehrhard, HalfLinesGiveEquality) {
  StreamRng rng(21);
  for (int t = 0; t < 50; ++t) {
    const double a = 4.0 * rng.uniform() - 2.0, b = 4.0 * rng.uniform() - 2.0, lam = rng.uniform();
    const auto rep = check_ehrhard(interval(a, 60), interval(b, 60), lam);
    EXPECT_NEAR(rep.margin, 0.0, 1e-9);
    EXPECT_TRUE(rep.equality);
  }
}

TEST(Ehrhard, ExactIntervals) {
  StreamRng rng(22);
  for (int t = 0; t < 200; ++t) {
    const double a = 6 * rng.uniform() - 3, b = a + 3 * rng.uniform() + 0.01;
    const double c = 6 * rng.uniform() - 3, d = c + 3 * rng.uniform() + 0.01;
    const auto rep = check_ehrhard(interval(a, b), interval(c, d), rng.uniform());
    EXPECT_GE(rep.margin, -1e-9);
    EXPECT_TRUE(rep.holds());
  }
}

TEST(Ehrhard, MonteCarloPlanarBodies) {
  StreamRng rng(23);
  for (int t = 0; t < 5; ++t) {
    const Polytope a = generators::random_polytope(rng, 2), b = generators::random_polytope(rng, 2);
    const auto rep = check_ehrhard(a, b, rng.uniform(), mc(100'000, 100 + t));
    ASSERT_TRUE(rep.std_error.has_value());
    EXPECT_GE(rep.margin, -3.0 * *rep.std_error);
  }
}

TEST(Ehrhard, DegenerateEstimateRaises) {
  const Polytope far = Polytope::box(pt({20, 20}), pt({21, 21}));
  EXPECT_THROW(check_ehrhard(far, disk64(), 0.5, mc(1000, 1)), PrecisionError);
  EXPECT_THROW(check_ehrhard(disk64(), disk64(), 1.5), std::invalid_argument);
}

TEST(FractionalGaussian, SingletonPartitionIsEhrhard) {
  const Polytope a = Polytope::box(pt({-1, -0.5}), pt({1, 1}));
  const Polytope b = disk64();
  const double lam = 0.3;
  const FractionalPartition fp(Hypergraph(2, {{1}, {2}}), std::vector<double>{1.0, 1.0});
  const GaussianBodyInstance inst{{a, b}, {lam, 1 - lam}, fp};
  const auto frac = check_fractional_gaussian(inst, mc(100'000, 5));
  const auto ehr = check_ehrhard(a, b, lam, mc(100'000, 5));
  EXPECT_NEAR(frac.lhs, ehr.lhs, 1e-15);
  EXPECT_NEAR(frac.margin, ehr.margin, 1e-12);
}

TEST(FractionalGaussian, LeaveOneOutExact) {
  StreamRng rng(31);
  for (int t = 0; t < 100; ++t) {
    std::vector<Polytope> bodies;
    std::vector<double> lam;
    double total = 0;
    for (int j = 0; j < 3; ++j) {
      const double a = 4 * rng.uniform() - 2;
      bodies.push_back(interval(a, a + 2 * rng.uniform() + 0.05));
      lam.push_back(rng.uniform() + 0.01);
      total += lam.back();
    }
    for (double& l : lam) l /= total;
    const GaussianBodyInstance inst{bodies, lam, degree_partition(leave_one_out(3))};
    const auto rep = check_fractional_gaussian(inst);
    EXPECT_GE(rep.margin, -1e-9);
  }
}

TEST(FractionalGaussian, ZeroWeightEdgesAreSkipped) {
  const Polytope a = interval(-1, 1), b = interval(0, 2), c = interval(-3, 0.5);
  const FractionalPartition fp(Hypergraph(3, {{1}, {2}, {3}}), std::vector<double>{1, 1, 1});
  const GaussianBodyInstance inst{{a, b, c}, {0.5, 0.5, 0.0}, fp};
  const auto rep = check_fractional_gaussian(inst);
  EXPECT_EQ(rep.details["edgesSkipped"], json::array({2}));
  EXPECT_EQ(rep.details["edgesUsed"].size(), 2u);
  EXPECT_NEAR(rep.margin, check_ehrhard(a, b, 0.5).margin, 1e-12);
}

TEST(FractionalGaussian, InstanceValidation) {
  const FractionalPartition fp(Hypergraph(2, {{1}, {2}}), std::vector<double>{1, 1});
  EXPECT_THROW(check_fractional_gaussian({{interval(0, 1), interval(0, 1)}, {0.5, 0.6}, fp}), std::invalid_argument);
  EXPECT_THROW(check_fractional_gaussian({{interval(0, 1)}, {1.0}, fp}), std::invalid_argument);
  EXPECT_THROW(check_fractional_gaussian({{interval(0, 1), interval(1, 1)}, {0.5, 0.5}, fp}), std::invalid_argument);
}

TEST(FractionalGaussian, EdgeDecompositionEqualsCombination) {
  // Σ λ_j K_j = Σ_s β_s λ_s K^(s) by fractional additivity.
  StreamRng rng(41);
  const auto fp = degree_partition(leave_one_out(3));
  std::vector<Polytope> bodies;
  for (int j = 0; j < 3; ++j) bodies.push_back(generators::random_polytope(rng, 2));
  const GaussianBodyInstance inst{bodies, {0.2, 0.3, 0.5}, fp};
  EXPECT_TRUE(approx_equal(inst.combination(), inst.edge_decomposition(), 1e-9));
}
