#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace normlab;
using namespace testing_support;

namespace {

ExactDistribution two_atom() {
  return exact_distribution(VectorFamily(NormSpec::linf(1), {{1}, {1}}), std::vector<double>{1, 1});
}

double total_mass(const ExactDistribution& d) {
  CompensatedSum s;
  for (const auto& a : d.atoms) s.add(a.probability);
  return s.value();
}

}  // namespace

TEST(Concentration, DisjointSupportIsOneAtom) {
  std::vector<std::vector<double>> e(4, std::vector<double>(4, 0.0));
  for (std::size_t i = 0; i < 4; ++i) e[i][i] = 1.0;
  for (double p : {1.0, 2.0, 3.0}) {
    const auto d = exact_distribution(VectorFamily(NormSpec::lp(p, 4), e), std::vector<double>{1, -2, 0.5, 3});
    ASSERT_EQ(d.atoms.size(), 1u);
    EXPECT_EQ(d.variance, 0.0);
    EXPECT_TRUE(tail_check(d, default_t_grid(d)).fit_skipped);
    EXPECT_EQ(median_vs_mean(d).gap, 0.0);
  }
}

TEST(Concentration, TwoAtomLaw) {
  const auto d = two_atom();
  ASSERT_EQ(d.atoms.size(), 2u);
  EXPECT_EQ(d.atoms[0].value, 0.0);
  EXPECT_EQ(d.atoms[0].probability, 0.5);
  EXPECT_EQ(d.atoms[1].value, 2.0);
  EXPECT_EQ(d.expectation, 1.0);
  EXPECT_EQ(d.median, 0.0);
  EXPECT_EQ(d.variance, 1.0);
  EXPECT_NEAR(d.sigma, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(total_mass(d), 1.0);

  const auto fit = tail_check(d, std::vector<double>{1.0, 1.5});
  EXPECT_EQ(fit.points[0].probability, 1.0);
  EXPECT_EQ(fit.points[1].probability, 0.0);
  EXPECT_TRUE(fit.non_increasing);

  const auto g = median_vs_mean(d);
  EXPECT_EQ(g.gap, 1.0);
  EXPECT_EQ(g.stddev, 1.0);
  EXPECT_TRUE(g.within_stddev);
}

TEST(Concentration, AtomsMatchBruteForce) {
  Rng rng(91);
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t n = uniform_int(rng, 1, 10);
    const auto fam = random_family(menu_space(k, 3), n, rng);
    const auto x = gaussian(rng, n);
    const auto d = exact_distribution(fam, x);
    const auto values = oracle::sign_sum_values(oracle_norm(fam.space()), fam.vectors(), x);
    // expectation, variance (two-pass), lower median
    long double mean = 0.0L;
    for (double v : values) mean += v;
    mean /= values.size();
    long double var = 0.0L;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= values.size();
    EXPECT_LE(rel_err(d.expectation, static_cast<double>(mean)), 1e-12);
    EXPECT_NEAR(d.variance, static_cast<double>(var), 1e-12 * std::max(1.0, static_cast<double>(mean * mean)));
    const double med = values[(values.size() - 1) / 2];
    EXPECT_NEAR(d.median, med, 1e-9);
    EXPECT_NEAR(total_mass(d), 1.0, 1e-12);
    std::uint64_t mult = 0;
    for (const auto& a : d.atoms) mult += a.multiplicity;
    EXPECT_EQ(mult, std::uint64_t{1} << n);
    for (std::size_t a = 1; a < d.atoms.size(); ++a) EXPECT_GT(d.atoms[a].value - d.atoms[a - 1].value, 1e-12);
  }
}

TEST(Concentration, RandomInstancesTailAndMedian) {
  Rng rng(92);
  for (int k = 0; k < 10; ++k) {
    const auto fam = random_family(NormSpec::linf(4), 12, rng);
    const auto d = exact_distribution(fam, gaussian(rng, 12));
    const auto fit = tail_check(d, default_t_grid(d));
    EXPECT_TRUE(fit.non_increasing);
    EXPECT_FALSE(fit.fit_skipped);
    EXPECT_GT(fit.b, 0.0);
    EXPECT_TRUE(median_vs_mean(d).within_stddev);
    EXPECT_NEAR(total_mass(d), 1.0, 1e-12);
  }
}

TEST(Concentration, TailProbabilityMatchesCount) {
  Rng rng(93);
  const auto fam = random_family(NormSpec::lp(1.0, 2), 8, rng);
  const auto x = gaussian(rng, 8);
  const auto d = exact_distribution(fam, x);
  const auto values = oracle::sign_sum_values(oracle_norm(fam.space()), fam.vectors(), x);
  for (double t : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    std::size_t c = 0;
    for (double v : values) c += std::abs(v - d.expectation) >= t - 1e-12;
    EXPECT_NEAR(tail_probability(d, t), static_cast<double>(c) / values.size(), 1e-12);
  }
}

TEST(Concentration, AmplificationTwoAtom) {
  const auto d = two_atom();
  const std::vector<std::size_t> Ns{2};
  const auto t = amplification_check(d, Ns, 1.5, 20000, 7);
  const auto& row = t.rows[0];
  EXPECT_LE(std::abs(row.frequency - 0.25), 3.0 * std::sqrt(0.25 * 0.75 / 20000));
}

TEST(Concentration, AmplificationImpossibleEventAndPrecondition) {
  const auto d = two_atom();
  const std::vector<std::size_t> Ns{2, 4, 8};
  const auto t = amplification_check(d, Ns, 2.5, 1000, 7);
  for (const auto& r : t.rows) EXPECT_EQ(r.frequency, 0.0);
  EXPECT_EQ(t.slope, -INFINITY);
  EXPECT_TRUE(t.slope_check);
  EXPECT_THROW(amplification_check(d, Ns, 0.0, 1000, 7), Error);
}

TEST(Concentration, AmplificationSlopeNegative) {
  const auto d = two_atom();
  const std::vector<std::size_t> Ns{2, 4, 8, 16};
  const auto t = amplification_check(d, Ns, 1.5, 20000, 11);
  EXPECT_GE(t.nonzero_rows, 3u);
  EXPECT_LT(t.slope, 0.0);
  EXPECT_TRUE(t.slope_check);
}

TEST(Concentration, CapacityError) {
  Rng rng(94);
  const auto fam = random_family(NormSpec::lp(2.0, 2), 10, rng);
  EXPECT_THROW(exact_distribution(fam, gaussian(rng, 10), 8), Error);
}
