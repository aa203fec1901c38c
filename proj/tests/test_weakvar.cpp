#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace normlab;
using namespace testing_support;

TEST(WeakVariance, L2BasisVectorsGiveMaxAbs) {
  Rng rng(41);
  std::vector<std::vector<double>> e(5, std::vector<double>(5, 0.0));
  for (std::size_t i = 0; i < 5; ++i) e[i][i] = 1.0;
  VectorFamily fam(NormSpec::lp(2.0, 5), e);
  for (int k = 0; k < 20; ++k) {
    const auto x = gaussian(rng, 5);
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    const auto s = sigma(fam, x);
    EXPECT_NEAR(s.value, m, 1e-12);
    EXPECT_EQ(s.method, SigmaMethod::spectral);
    EXPECT_FALSE(s.lower_bound_only);
  }
}

TEST(WeakVariance, LinfDimOneIsEuclideanLength) {
  VectorFamily fam(NormSpec::linf(1), {{1}, {1}, {1}, {1}});
  const std::vector<double> x{1, -2, 2, 4};
  EXPECT_NEAR(sigma(fam, x).value, 5.0, 1e-14);
}

TEST(WeakVariance, L1HandExample) {
  VectorFamily fam(NormSpec::lp(1.0, 2), {{1, 0}, {0, 1}});
  const auto s = sigma(fam, std::vector<double>{1, 1});
  EXPECT_NEAR(s.value, std::sqrt(2.0), 1e-14);
  EXPECT_EQ(s.method, SigmaMethod::vertex_enumeration);
  ASSERT_TRUE(s.certificate);
  EXPECT_EQ(std::abs((*s.certificate)[0]), 1.0);
  EXPECT_EQ(std::abs((*s.certificate)[1]), 1.0);
}

TEST(WeakVariance, ExactMethodsMatchOracles) {
  Rng rng(42);
  for (std::size_t k = 0; k < 90; ++k) {
    const std::size_t n = uniform_int(rng, 1, 8), m = uniform_int(rng, 1, 10);
    const auto space = menu_space(k, m);
    const auto fam = random_family(space, n, rng);
    const auto x = gaussian(rng, n);
    const auto s = sigma(fam, x);
    double ref = 0.0;
    if (space.is_l1()) ref = oracle::sigma_l1(fam.vectors(), x);
    else if (space.is_l2()) ref = oracle::sigma_l2(fam.vectors(), x);
    else ref = oracle::sigma_linf(fam.vectors(), x);
    EXPECT_LE(rel_err(s.value, ref), 1e-9) << space.describe();
    EXPECT_FALSE(s.lower_bound_only);
  }
}

TEST(WeakVariance, CertificateReproducesValue) {
  Rng rng(43);
  for (std::size_t k = 0; k < 60; ++k) {
    const auto space = k % 4 == 3 ? NormSpec::polytope({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, -1, 2}})
                                  : menu_space(k, 3);
    const auto fam = random_family(space, 5, rng);
    const auto x = gaussian(rng, 5);
    const auto s = sigma(fam, x);
    ASSERT_TRUE(s.certificate) << space.describe();
    const auto& phi = *s.certificate;
    if (auto dn = dual_norm(space, phi)) {
      EXPECT_LE(*dn, 1.0 + 1e-9);
    }
    const double e = oracle::energy(phi, fam.vectors(), x);
    EXPECT_LE(std::abs(e * e - s.value * s.value), 1e-9 * s.value * s.value);
  }
}

TEST(WeakVariance, PolytopeIsExactScan) {
  const std::vector<std::vector<double>> fs = {{1, 0}, {0, 1}, {1, 1}};
  VectorFamily fam(NormSpec::polytope(fs), {{1, 2}, {-1, 0.5}, {0.3, 0.3}});
  const std::vector<double> x{1, 2, -1};
  double ref = 0.0;
  for (const auto& f : fs) ref = std::max(ref, oracle::energy(f, fam.vectors(), x));
  const auto s = sigma(fam, x);
  EXPECT_NEAR(s.value, ref, 1e-14);
  EXPECT_EQ(s.method, SigmaMethod::extreme_point_scan);
  EXPECT_FALSE(s.lower_bound_only);
}

TEST(WeakVariance, SmoothLpIsFlaggedLowerBound) {
  Rng rng(44);
  for (int k = 0; k < 20; ++k) {
    const auto fam = random_family(NormSpec::lp(3.0, 3), 4, rng);
    const auto x = gaussian(rng, 4);
    const auto s = sigma(fam, x);
    EXPECT_TRUE(s.lower_bound_only);
    // any unit dual functional gives a lower bound; the certificate is one
    ASSERT_TRUE(s.certificate);
    EXPECT_LE(*dual_norm(fam.space(), *s.certificate), 1.0 + 1e-9);
    // the lower bound still respects sqrt(2) times the norm
    NormInstance inst(fam);
    EXPECT_LE(s.value, std::sqrt(2.0) * exact_unconditional_norm(inst, x) + 1e-9);
  }
}

TEST(WeakVariance, L1AboveVertexCapIsFlagged) {
  Rng rng(45);
  const auto fam = random_family(NormSpec::lp(1.0, 6), 3, rng);
  const auto x = gaussian(rng, 3);
  const auto capped = sigma(fam, x, 4);
  EXPECT_TRUE(capped.lower_bound_only);
  EXPECT_LE(capped.value, sigma(fam, x).value + 1e-12);
}

TEST(WeakVariance, SigmaIsANorm) {
  Rng rng(46);
  for (std::size_t k = 0; k < 90; ++k) {
    const std::size_t n = uniform_int(rng, 1, 7);
    const auto fam = random_family(menu_space(k, uniform_int(rng, 1, 8)), n, rng);
    const auto x = gaussian(rng, n), y = gaussian(rng, n);
    const double t = uniform(rng, -4, 4);
    std::vector<double> tx(x), s(x);
    for (std::size_t i = 0; i < n; ++i) {
      tx[i] *= t;
      s[i] += y[i];
    }
    const double sx = sigma(fam, x).value;
    EXPECT_LE(std::abs(sigma(fam, tx).value - std::abs(t) * sx), 1e-9 * std::abs(t) * sx);
    EXPECT_LE(sigma(fam, s).value, sx + sigma(fam, y).value + 1e-9);
  }
}

TEST(Khinchin, Examples) {
  const auto a = khinchin_bounds(std::vector<double>{1, 1});
  EXPECT_DOUBLE_EQ(a.exact, 1.0);
  EXPECT_DOUBLE_EQ(a.lower, 1.0);
  EXPECT_NEAR(a.exact / a.upper, 1.0 / std::sqrt(2.0), 1e-15);
  const auto b = khinchin_bounds(std::vector<double>{1, 0, 0});
  EXPECT_DOUBLE_EQ(b.exact, 1.0);
  EXPECT_DOUBLE_EQ(b.upper, 1.0);
  const auto c = khinchin_bounds(std::vector<double>{3, 4});
  EXPECT_DOUBLE_EQ(c.exact, 4.0);
  EXPECT_GE(c.exact, 5.0 / std::sqrt(2.0));
  EXPECT_LE(c.exact, 5.0);
}

TEST(Khinchin, MatchesBruteForce) {
  Rng rng(47);
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = uniform_int(rng, 1, 12);
    const auto y = gaussian(rng, n);
    oracle::Mat ones(n, oracle::Vec{1.0});
    const double ref = oracle::unconditional_norm([](const oracle::Vec& u) { return std::abs(u[0]); }, ones, y);
    EXPECT_LE(rel_err(khinchin_bounds(y).exact, ref), 1e-12);
  }
  EXPECT_THROW(khinchin_bounds(std::vector<double>(25, 1.0)), Error);
}

TEST(Claim1, Examples) {
  NormInstance scalar(VectorFamily(NormSpec::linf(1), {{1}, {1}}));
  const auto r = claim1_check(scalar, std::vector<double>{1, 1});
  EXPECT_NEAR(r.ratio, std::sqrt(2.0), 1e-14);

  Rng rng(48);
  NormInstance line(VectorFamily(NormSpec::linf(1), std::vector<std::vector<double>>(6, {1.0})));
  for (int k = 0; k < 20; ++k) {
    const auto x = gaussian(rng, 6);
    const auto c = claim1_check(line, x);
    EXPECT_GE(c.ratio, 1.0 - 1e-12);
    EXPECT_LE(c.ratio, std::sqrt(2.0) + 1e-12);
  }

  NormInstance l2(random_family(NormSpec::lp(2.0, 3), 4, rng));
  const auto e = claim1_check(l2, std::vector<double>{0, 0, 1, 0});
  EXPECT_NEAR(e.ratio, 1.0, 1e-12);
}

TEST(Claim1, RatioNeverAboveSqrt2) {
  Rng rng(49);
  for (std::size_t k = 0; k < 90; ++k) {
    const std::size_t n = uniform_int(rng, 1, 9);
    NormInstance inst(random_family(menu_space(k, uniform_int(rng, 1, 8)), n, rng));
    const auto c = claim1_check(inst, gaussian(rng, n));
    EXPECT_LE(c.sigma, std::sqrt(2.0) * c.triple_norm + 1e-9);
  }
}
