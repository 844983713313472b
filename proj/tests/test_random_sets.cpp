#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracineq/random_sets.hpp"

using namespace fracineq;

namespace {

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) p(k++) = x;
  return p;
}

constexpr double kLlnTwo = 0.3813798817;  // E|(A1 + A2)/2|^{1/2} for unit rotated segments

}  // namespace

TEST(RandomSetModel, RotatedSegmentSamples) {
  const auto model = RandomSetModel::rotated_segment(2.0);
  StreamRng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Polytope a = model.sample(rng);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR((a.vertices()[0] - a.vertices()[1]).norm(), 2.0, 1e-12);
    EXPECT_NEAR(a.vertex_centroid().norm(), 0.0, 1e-12);
    EXPECT_EQ(a.volume(), 0.0);
  }
}

TEST(RandomSetModel, ScaledBodyUsesListedValues) {
  const auto model = model_by_name("scaled-square");
  StreamRng rng(2);
  int big = 0;
  for (int t = 0; t < 2000; ++t) {
    const double v = model.sample(rng).volume();
    ASSERT_TRUE(std::abs(v - 1.0) < 1e-12 || std::abs(v - 4.0) < 1e-12) << v;
    big += v > 2.0;
  }
  EXPECT_NEAR(big / 2000.0, 0.5, 0.05);
}

TEST(RandomSetModel, RandomPolygonStaysInBox) {
  const auto model = RandomSetModel::random_polygon(6, {-1, 2}, {0, 3});
  StreamRng rng(3);
  for (int t = 0; t < 100; ++t)
    for (const auto& v : model.sample(rng).vertices()) {
      EXPECT_GE(v(0), -1.0);
      EXPECT_LE(v(0), 0.0);
      EXPECT_GE(v(1), 2.0);
      EXPECT_LE(v(1), 3.0);
    }
}

TEST(RandomSetModel, Registry) {
  std::vector<std::string> names;
  for (const auto& m : builtin_models()) names.push_back(m.name);
  EXPECT_EQ(names, (std::vector<std::string>{"rotated-segment", "random-polygon", "scaled-square", "fixed-square",
                                             "scaled-triangle"}));
  EXPECT_THROW(model_by_name("sphere"), std::invalid_argument);
  EXPECT_THROW(RandomSetModel::scaled_body(Polytope::cube(3), {1.0}), std::invalid_argument);
  EXPECT_THROW(RandomSetModel::scaled_body(Polytope::cube(2), {-1.0}), std::invalid_argument);
}

TEST(MinkowskiAverage, OfCopiesIsTheBody) {
  const Polytope t({pt({0, 0}), pt({2, 0}), pt({0.5, 1})});
  EXPECT_TRUE(approx_equal(minkowski_average({t, t, t, t}), t, 1e-12));
  EXPECT_THROW(minkowski_average({}), std::invalid_argument);
}

TEST(Hausdorff, Examples) {
  const Polytope sq = Polytope::cube(2);
  EXPECT_NEAR(hausdorff_distance(sq, translate(sq, pt({0.5, 0}))), 0.5, 1e-12);
  EXPECT_NEAR(hausdorff_distance(sq, Polytope::box(pt({0, 0}), pt({2, 2}))), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(hausdorff_distance(sq, sq), 0.0);
}

TEST(Aumann, FixedBodyIsRecoveredExactly) {
  const auto est = aumann_expectation(model_by_name("fixed-square"), kDefaultDirections, 100, 5);
  EXPECT_NEAR(est.polygon().volume(), 1.0, 1e-9);
  EXPECT_TRUE(approx_equal(est.polygon(), Polytope::box(pt({-0.5, -0.5}), pt({0.5, 0.5})), 1e-9));
}

TEST(Aumann, RotatedSegmentGivesADisk) {
  const auto est = aumann_expectation(RandomSetModel::rotated_segment(), kDefaultDirections, 20000, 6);
  for (std::size_t k = 0; k < est.support.size(); ++k)
    EXPECT_NEAR(est.support[k], 1.0 / std::numbers::pi, 4.0 * est.support_error[k] + 1e-12);
  EXPECT_NEAR(std::sqrt(est.polygon().volume()), 1.0 / std::sqrt(std::numbers::pi), 2e-3);
}

TEST(Aumann, ScaledSquareMean) {
  const auto est = aumann_expectation(model_by_name("scaled-square"), 64, 20000, 7);
  const double c = 2.0 * est.support[0];  // mean scale
  EXPECT_NEAR(c, 1.5, 0.03);
  EXPECT_NEAR(est.polygon().volume(), c * c, 1e-9);
}

TEST(Aumann, ArgumentChecks) {
  EXPECT_THROW(aumann_expectation(RandomSetModel::rotated_segment(), 4, 1000, 1), std::invalid_argument);
  EXPECT_THROW(aumann_expectation(RandomSetModel::rotated_segment(), 360, 10, 1), std::invalid_argument);
}

TEST(Vitale, HoldsOnBuiltinModels) {
  for (const auto& m : builtin_models()) {
    const auto rep = check_vitale(m, 5000, 17);
    ASSERT_TRUE(rep.std_error.has_value());
    EXPECT_GE(rep.margin, -3.0 * *rep.std_error - rep.tol) << m.name;
  }
}

TEST(Vitale, DeterministicScalingIsEquality) {
  const auto rep = check_vitale(model_by_name("fixed-square"), 1000, 3);
  EXPECT_NEAR(rep.margin, 0.0, 1e-9);
  EXPECT_TRUE(rep.equality);
}

TEST(Vitale, RotatedSegmentHasPositiveGap) {
  const auto rep = check_vitale(RandomSetModel::rotated_segment(), 5000, 4);
  EXPECT_EQ(rep.rhs, 0.0);
  EXPECT_NEAR(rep.lhs, 1.0 / std::sqrt(std::numbers::pi), 3e-3);
  EXPECT_FALSE(rep.equality);
}

TEST(Vitale, IndependentOfJobs) {
  const auto a = check_vitale(model_by_name("random-polygon"), 2000, 8, 1);
  const auto b = check_vitale(model_by_name("random-polygon"), 2000, 8, 3);
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_EQ(a.rhs, b.rhs);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(LLN, RotatedSegment) {
  const auto res = lln_monotonicity(RandomSetModel::rotated_segment(), 6, 4000, 12, 1, 5000);
  EXPECT_EQ(res.means[0], 0.0);
  EXPECT_NEAR(res.means[1], kLlnTwo, 3.0 * res.std_errors[1]);
  EXPECT_TRUE(res.monotone);
  EXPECT_TRUE(res.monotonicity_breaks.empty());
  EXPECT_LT(res.means.back(), 1.0 / std::sqrt(std::numbers::pi));
  for (std::size_t i = 1; i < res.hausdorff_means.size(); ++i)
    EXPECT_LT(res.hausdorff_means[i], res.hausdorff_means[i - 1] + 0.02);
  EXPECT_EQ(res.step_std_errors.size(), 5u);
}

TEST(LLN, FixedBodyIsConstant) {
  const auto res = lln_monotonicity(model_by_name("fixed-square"), 4, 50, 1, 1, 200);
  for (double m : res.means) EXPECT_NEAR(m, 1.0, 1e-12);
  EXPECT_TRUE(res.monotone);
}

TEST(LLN, IndependentOfJobsAndSerializes) {
  const auto a = lln_monotonicity(model_by_name("scaled-triangle"), 4, 300, 5, 1, 1000);
  const auto b = lln_monotonicity(model_by_name("scaled-triangle"), 4, 300, 5, 4, 1000);
  EXPECT_EQ(to_json_value(a).dump(), to_json_value(b).dump());
  const json j = to_json_value(a);
  for (const char* key : {"model", "M", "means", "stdErrors", "stepStdErrors", "hausdorffMeans", "aumannVolumeRoot",
                          "seed", "replicates", "monotone", "monotonicityBreaks"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_THROW(lln_monotonicity(model_by_name("scaled-triangle"), 1, 300, 5), std::invalid_argument);
}
