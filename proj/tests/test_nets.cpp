#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace normlab;
using namespace testing_support;

TEST(Nets, OneDimensionalSphereHasTwoPoints) {
  NormInstance inst(VectorFamily(NormSpec::lp(2.0, 2), {{3, 4}}));
  const auto net = build_net(inst, 0.5, 0, 1);
  ASSERT_EQ(net.points.size(), 2u);
  EXPECT_NEAR(net.points[0][0], 0.2, 1e-15);
  EXPECT_NEAR(net.points[1][0], -0.2, 1e-15);
  EXPECT_EQ(net.covering_status, CoveringStatus::certified_small_n);
}

TEST(Nets, SeparationPackingAndUnitNorm) {
  Rng rng(51);
  for (std::size_t k = 0; k < 9; ++k) {
    const std::size_t n = 2 + k % 3;
    NormInstance inst(random_family(menu_space(k, 3), n, rng));
    for (double theta : {0.5, 0.25}) {
      const auto net = build_net(inst, theta, 200, k);
      EXPECT_GT(min_pairwise_distance(inst, net), theta);
      EXPECT_LE(static_cast<double>(net.points.size()), std::pow(3.0 / theta, static_cast<double>(n)));
      for (const auto& p : net.points) EXPECT_NEAR(exact_unconditional_norm(inst, p), 1.0, 1e-9);
    }
  }
}

TEST(Nets, ThreeDimensionalPackingBound) {
  Rng rng(52);
  NormInstance inst(random_family(NormSpec::lp(1.0, 2), 3, rng));
  const auto net = build_net(inst, 0.5, 0, 3);
  EXPECT_LE(net.points.size(), 216u);
  EXPECT_EQ(net.covering_status, CoveringStatus::certified_small_n);
}

TEST(Nets, HigherDimensionIsHeuristic) {
  Rng rng(53);
  NormInstance inst(random_family(NormSpec::linf(2), 4, rng));
  EXPECT_EQ(build_net(inst, 0.5, 50, 1).covering_status, CoveringStatus::heuristic);
}

TEST(Nets, ThetaRange) {
  NormInstance inst(VectorFamily(NormSpec::lp(2.0, 1), {{1}, {1}}));
  EXPECT_THROW(build_net(inst, 0.0, 10, 1), Error);
  EXPECT_THROW(build_net(inst, 1.5, 10, 1), Error);
}

TEST(Nets, DecomposeNetPoint) {
  Rng rng(54);
  NormInstance inst(random_family(NormSpec::lp(2.0, 2), 2, rng));
  const auto net = build_net(inst, 0.5, 0, 2);
  const auto d = net_decompose(inst, net, net.points[3], 1);
  ASSERT_EQ(d.coefficients.size(), 1u);
  EXPECT_NEAR(d.coefficients[0], 1.0, 1e-12);
  EXPECT_EQ(d.point_indices[0], 3u);
  EXPECT_NEAR(d.residual_norm, 0.0, 1e-12);
}

TEST(Nets, DecompositionContracts) {
  Rng rng(55);
  for (std::size_t k = 0; k < 6; ++k) {
    const std::size_t n = 2 + k % 2;
    NormInstance inst(random_family(menu_space(k, 3), n, rng));
    const auto net = build_net(inst, 0.5, 0, k);
    for (int t = 0; t < 20; ++t) {
      const auto x = normalize_triple(inst, gaussian(rng, n));
      const auto d = net_decompose(inst, net, x, 10);
      EXPECT_LE(d.residual_norm, std::pow(2.0, -10) + 1e-9);
      for (std::size_t j = 0; j < d.coefficients.size(); ++j) {
        EXPECT_LE(std::abs(d.coefficients[j]), std::pow(2.0, 1.0 - static_cast<double>(j + 1)) + 1e-9);
      }
      // telescoping: recompute the residual directly
      std::vector<double> r(x);
      for (std::size_t j = 0; j < d.coefficients.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= d.coefficients[j] * net.points[d.point_indices[j]][i];
      }
      EXPECT_NEAR(exact_unconditional_norm(inst, r), d.residual_norm, 1e-9);
    }
  }
}

TEST(Nets, CoveringViolationCarriesWitness) {
  NormInstance inst(VectorFamily(NormSpec::lp(2.0, 2), {{1, 0}, {0, 1}}));
  NetPoints net;
  net.theta = 0.5;
  net.points = {{1.0, 0.0}};
  const std::vector<double> x{-1.0, 0.0};
  try {
    net_decompose(inst, net, x, 3);
    FAIL();
  } catch (const CoveringViolation& e) {
    EXPECT_EQ(e.kind(), ErrorKind::covering_violation);
    EXPECT_GT(e.distance(), 0.5);
    EXPECT_EQ(e.witness(), x);
  }
}

TEST(Nets, DecomposeRequiresUnitVectorAndHalfNet) {
  NormInstance inst(VectorFamily(NormSpec::lp(2.0, 2), {{1, 0}, {0, 1}}));
  const auto net = build_net(inst, 0.5, 0, 1);
  EXPECT_THROW(net_decompose(inst, net, std::vector<double>{2.0, 0.0}, 3), Error);
  const auto coarse = build_net(inst, 0.9, 0, 1);
  EXPECT_THROW(net_decompose(inst, coarse, std::vector<double>{1.0, 0.0}, 3), Error);
}

TEST(Nets, SupBoundIsTwiceNetMax) {
  Rng rng(56);
  const auto fam = random_family(NormSpec::linf(3), 3, rng);
  NormInstance inst(fam);
  const auto net = build_net(inst, 0.5, 0, 4);
  EmpiricalNormInstance emp(fam, sample_sign_matrix(3, 5, 9));
  double m = 0.0;
  for (const auto& p : net.points) m = std::max(m, empirical_norm(emp, p));
  const auto b = certified_sup_bound(emp, net);
  EXPECT_EQ(b.value, 2.0 * m);
  EXPECT_EQ(b.covering_status, CoveringStatus::certified_small_n);
  // fresh samples never exceed the certified bound
  for (const auto& x : sphere_sample(inst, 10000, 77)) EXPECT_LE(empirical_norm(emp, x), b.value + 1e-9);
}

TEST(Nets, SupBoundClosedFormL1AllPlus) {
  // v_i = e_i in L1, all-plus signs: |||x|||_N = |sum x_i|, |||x||| = sum |x_i|, sup = 1.
  const std::size_t n = 3;
  std::vector<std::vector<double>> e(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) e[i][i] = 1.0;
  VectorFamily fam(NormSpec::lp(1.0, n), e);
  NormInstance inst(fam);
  EmpiricalNormInstance emp(fam, SignMatrix::constant(n, 4, 1));
  const auto net = build_net(inst, 0.5, 0, 5);
  EXPECT_GE(certified_sup_bound(emp, net).value, 1.0);
}

TEST(Nets, JsonRoundTrip) {
  Rng rng(57);
  NormInstance inst(random_family(NormSpec::lp(2.0, 2), 2, rng));
  const auto net = build_net(inst, 0.5, 0, 6);
  const auto back = net_from_json(json::parse(to_json(net).dump()));
  EXPECT_EQ(back.theta, net.theta);
  EXPECT_EQ(back.points, net.points);
  EXPECT_EQ(back.covering_status, net.covering_status);
}
