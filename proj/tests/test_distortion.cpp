#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace normlab;
using namespace testing_support;

namespace {

TrialOptions small_probes(std::size_t samples = 200, std::size_t steps = 20) {
  TrialOptions opt;
  opt.probes.samples = samples;
  opt.probes.descent_steps = steps;
  return opt;
}

bool same_report(const DistortionReport& a, const DistortionReport& b) {
  return a.trial_seed == b.trial_seed && a.N == b.N && a.min.value == b.min.value &&
         a.min.direction == b.min.direction && a.max.value == b.max.value && a.probe_min == b.probe_min &&
         a.uv.u_count == b.uv.u_count && a.uv.v_min == b.uv.v_min;
}

}  // namespace

TEST(Distortion, ColumnsForXi) {
  EXPECT_EQ(columns_for_xi(8, 0.5), 12u);
  EXPECT_EQ(columns_for_xi(12, 0.1), 13u);
  EXPECT_EQ(columns_for_xi(3, 0.5), 5u);  // round(4.5) rounds away from zero
  EXPECT_THROW(columns_for_xi(4, -1.0), Error);
}

TEST(Distortion, SphereSample) {
  Rng rng(61);
  NormInstance inst(random_family(NormSpec::lp(1.0, 3), 5, rng));
  EXPECT_TRUE(sphere_sample(inst, 0, 1).empty());
  for (const auto& x : sphere_sample(inst, 100, 2)) EXPECT_NEAR(exact_unconditional_norm(inst, x), 1.0, 1e-9);
  NormInstance one(VectorFamily(NormSpec::lp(2.0, 2), {{3, 4}}));
  for (const auto& x : sphere_sample(one, 20, 3)) EXPECT_NEAR(std::abs(x[0]), 0.2, 1e-15);
}

TEST(Distortion, SplitUV) {
  Rng rng(62);
  const auto fam = random_family(NormSpec::linf(3), 4, rng);
  NormInstance inst(fam);
  for (const auto& x : sphere_sample(inst, 50, 4)) {
    EXPECT_EQ(split_UV(fam, x, 0.0).cls, SphereClass::U);
    EXPECT_EQ(split_UV(fam, x, std::sqrt(2.0) + 1e-6).cls, SphereClass::V);
  }
  VectorFamily line(NormSpec::linf(1), {{1}, {1}, {1}});
  const auto s = split_UV(line, std::vector<double>{1, 0, 0}, 1.0);
  EXPECT_EQ(s.sigma, 1.0);
  EXPECT_EQ(s.cls, SphereClass::U);
  EXPECT_FALSE(s.tentative);
  const auto smooth = random_family(NormSpec::lp(3.0, 2), 3, rng);
  EXPECT_TRUE(split_UV(smooth, std::vector<double>{1, 0, 0}, 0.1).tentative);
}

TEST(Distortion, EnumerationMatrixReproducesExactNorm) {
  // v_i = e_i in L2: |||x||| = |x|_2, and the full enumeration matrix makes
  // |||.|||_N identical to |||.|||, so every probe evaluates to 1.
  const std::size_t n = 4;
  std::vector<std::vector<double>> e(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) e[i][i] = 1.0;
  NormInstance inst(VectorFamily(NormSpec::lp(2.0, n), e));
  auto opt = small_probes(100, 10);
  opt.signs = SignMatrix::full_enumeration(n);
  const auto r = run_trial(inst, 15.0, 5, opt);
  EXPECT_EQ(r.N, 16u);
  EXPECT_NEAR(r.min.value, 1.0, 1e-9);
  EXPECT_NEAR(r.max.value, 1.0, 1e-9);
}

TEST(Distortion, SingleNetPointProbe) {
  Rng rng(63);
  const auto fam = random_family(NormSpec::lp(1.0, 2), 3, rng);
  NormInstance inst(fam);
  NetPoints net;
  net.theta = 0.5;
  net.points = {normalize_triple(inst, {1.0, 2.0, -1.0})};
  auto opt = small_probes(0, 0);
  opt.probes.net = &net;
  const auto r = run_trial(inst, 1.0, 8, opt);
  EmpiricalNormInstance emp(fam, sample_sign_matrix(3, 6, derive_trial_seed(8, 0)));
  EXPECT_EQ(r.min.value, r.max.value);
  EXPECT_EQ(r.min.value, empirical_norm(emp, net.points[0]));
  EXPECT_EQ(r.min.method, EstimateMethod::net_scan);
  EXPECT_TRUE(r.certified_upper);
}

TEST(Distortion, TrialInvariants) {
  Rng rng(64);
  for (std::size_t k = 0; k < 6; ++k) {
    const auto fam = random_family(menu_space(k, 3), 6, rng);
    NormInstance inst(fam);
    auto opt = small_probes(150, 20);
    const auto r = run_trial(inst, 0.5, k, opt);
    EXPECT_LE(r.min.value, r.max.value);
    EXPECT_LE(r.min.value, r.probe_min);
    EXPECT_NEAR(exact_unconditional_norm(inst, r.min.direction), 1.0, 1e-9);
    EXPECT_NEAR(exact_unconditional_norm(inst, r.max.direction), 1.0, 1e-9);
    // the reported values are the |||.|||_N values at the reported directions
    EmpiricalNormInstance emp(fam, sample_sign_matrix(6, r.N, derive_trial_seed(k, 0)));
    EXPECT_EQ(empirical_norm(emp, r.min.direction), r.min.value);
    EXPECT_EQ(empirical_norm(emp, r.max.direction), r.max.value);
    // probe_min is the exact minimum of the probe set
    double pm = INFINITY;
    for (const auto& x : sphere_sample(inst, 150, derive_trial_seed(k, 1))) pm = std::min(pm, empirical_norm(emp, x));
    EXPECT_EQ(pm, r.probe_min);
    EXPECT_EQ(r.uv.u_count + r.uv.v_count, r.samples_used + (r.min.method == EstimateMethod::local_descent));
  }
}

TEST(Distortion, MaxBelowCertifiedUpperWhenCovered) {
  Rng rng(65);
  const auto fam = random_family(NormSpec::linf(2), 3, rng);
  NormInstance inst(fam);
  const auto net = build_net(inst, 0.5, 0, 1);
  auto opt = small_probes(300, 10);
  opt.probes.net = &net;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = run_trial(inst, 0.5, s, opt);
    ASSERT_TRUE(r.certified_upper);
    EXPECT_EQ(r.certified_upper->covering_status, CoveringStatus::certified_small_n);
    EXPECT_LE(r.max.value, r.certified_upper->value + 1e-9);
  }
}

TEST(Distortion, RerunIsIdentical) {
  Rng rng(66);
  NormInstance inst(random_family(NormSpec::linf(4), 8, rng));
  const auto opt = small_probes(100, 10);
  EXPECT_TRUE(same_report(run_trial(inst, 0.5, 42, opt), run_trial(inst, 0.5, 42, opt)));
}

TEST(Distortion, TrialsIndependentOfOrderAndThreads) {
  Rng rng(67);
  NormInstance inst(random_family(NormSpec::lp(1.0, 3), 6, rng));
  const auto opt = small_probes(60, 5);
  const auto serial = run_trials(inst, 0.5, 9, 6, opt, 1);
  const auto parallel = run_trials(inst, 0.5, 9, 6, opt, 4);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_TRUE(same_report(serial[t], parallel[t]));
    EXPECT_TRUE(same_report(serial[t], run_trial(inst, 0.5, derive_trial_seed(9, t), opt)));
  }
}

TEST(Distortion, ScaleRobustness) {
  Rng rng(68);
  const auto fam = random_family(NormSpec::lp(2.0, 3), 5, rng);
  const double t = 3.7;
  NormInstance a(fam), b(fam.scaled(t));
  const auto signs = sample_sign_matrix(5, 8, 1);
  EmpiricalNormInstance ea(fam, signs), eb(fam.scaled(t), signs);
  double amin = INFINITY, amax = 0, bmin = INFINITY, bmax = 0;
  for (const auto& x : sphere_sample(a, 200, 3)) {
    std::vector<double> y(x);
    for (auto& v : y) v /= t;
    const double va = empirical_norm(ea, x), vb = empirical_norm(eb, y);
    EXPECT_NEAR(exact_unconditional_norm(b, y), 1.0, 1e-9);
    amin = std::min(amin, va);
    amax = std::max(amax, va);
    bmin = std::min(bmin, vb);
    bmax = std::max(bmax, vb);
  }
  EXPECT_LE(std::abs(amin - bmin), 1e-9 * amin);
  EXPECT_LE(std::abs(amax - bmax), 1e-9 * amax);
}

TEST(Distortion, FailureFrequencyExtremes) {
  Rng rng(69);
  NormInstance inst(random_family(NormSpec::linf(3), 5, rng));
  const auto opt = small_probes(50, 5);
  EXPECT_EQ(failure_probability(inst, 0.5, 5, 0.0, INFINITY, 1, opt).frequency, 0.0);
  EXPECT_EQ(failure_probability(inst, 0.5, 5, 2.0, 1.0, 1, opt).frequency, 1.0);
  EXPECT_THROW(failure_probability(inst, 0.5, 0, 0.0, 1.0, 1, opt), Error);
}

TEST(Distortion, CalibratedTargetsGiveAboutTenPercent) {
  Rng rng(70);
  NormInstance inst(random_family(NormSpec::linf(4), 8, rng));
  const auto opt = small_probes(100, 10);
  const auto reports = run_trials(inst, 0.5, 3, 200, opt);
  const auto t = calibrate_targets(reports);
  const auto f = failure_frequency(reports, t.c_target, t.C_target);
  // at most 5% below c and 5% above C by construction; overlap lowers it
  EXPECT_LE(f.frequency, 0.10 + 1e-12);
  EXPECT_GE(f.frequency, 0.05);
}

TEST(Distortion, XiSweepDuplicateRowsAgree) {
  Rng rng(71);
  NormInstance inst(random_family(NormSpec::linf(3), 6, rng));
  const std::vector<double> xis{1.0, 1.0};
  const auto p = xi_sweep(inst, xis, 5, 11, small_probes(50, 5));
  ASSERT_EQ(p.rows.size(), 2u);
  EXPECT_EQ(p.rows[0].min.median, p.rows[1].min.median);
  EXPECT_EQ(p.rows[0].max.q3, p.rows[1].max.q3);
  EXPECT_TRUE(std::isnan(p.small_xi_log_slope));
  EXPECT_FALSE(p.note.empty());
  EXPECT_THROW(xi_sweep(inst, std::vector<double>{}, 5, 11, small_probes()), Error);
}

TEST(Distortion, LargeXiRatioCloserToOne) {
  Rng rng(72);
  NormInstance inst(random_family(NormSpec::linf(4), 8, rng));
  const std::vector<double> xis{0.25, 16.0};
  const auto p = xi_sweep(inst, xis, 30, 5, small_probes(200, 20));
  EXPECT_LT(p.rows[1].median_ratio, p.rows[0].median_ratio);
}

TEST(Distortion, TrialErrorsCarryTheIndex) {
  NormInstance inst(VectorFamily(NormSpec::lp(2.0, 1), {{1}, {1}}));
  TrialOptions opt = small_probes(0, 0);
  try {
    run_trials(inst, 0.5, 1, 3, opt);
    FAIL();
  } catch (const Error& e) {
    ASSERT_TRUE(e.index());
    EXPECT_EQ(*e.index(), 0u);
    EXPECT_NE(std::string(e.what()).find("trial 0"), std::string::npos);
  }
}
