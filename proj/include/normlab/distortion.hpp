#pragma once

// Desk-scale distortion experiments: estimate min and max of |||x|||_N over
// the unit sphere of |||.||| for random sign matrices, split the sphere by
// weak variance, and aggregate trials into failure frequencies and xi sweeps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/nets.hpp"
#include "normlab/parallel.hpp"
#include "normlab/rng.hpp"
#include "normlab/signs.hpp"
#include "normlab/stats.hpp"
#include "normlab/symmetrize.hpp"
#include "normlab/weakvar.hpp"

namespace normlab {

/// N = round((1 + xi) n), required to be at least 1.
inline std::size_t columns_for_xi(std::size_t n, double xi) {
  if (!std::isfinite(xi)) throw Error(ErrorKind::invalid_argument, "xi must be finite");
  const double cols = std::round((1.0 + xi) * static_cast<double>(n));
  if (cols < 1.0) throw Error(ErrorKind::invalid_argument, "xi gives N < 1");
  return static_cast<std::size_t>(cols);
}

/// Gaussian directions normalized by the exact norm.
inline std::vector<std::vector<double>> sphere_sample(const NormInstance& inst, std::size_t count,
                                                      std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  Rng rng(seed);
  while (out.size() < count) {
    auto x = gaussian_vector(rng, inst.n());
    if (kernels::L2{}(x.data(), x.size()) == 0.0) continue;
    out.push_back(normalize_triple(inst, std::move(x)));
  }
  return out;
}

enum class SphereClass { U, V };

struct SphereSplit {
  double sigma0 = 0.0;
  double sigma = 0.0;
  SphereClass cls = SphereClass::U;
  bool tentative = false;  // sigma was only a lower bound
};

/// U = {sigma(x) >= sigma0}, V = {sigma(x) < sigma0}.
inline SphereSplit split_UV(const VectorFamily& family, std::span<const double> x, double sigma0,
                            std::size_t max_vertex_dim = kDefaultMaxDualVertexDim) {
  const auto s = sigma(family, x, max_vertex_dim);
  SphereSplit out;
  out.sigma0 = sigma0;
  out.sigma = s.value;
  out.tentative = s.lower_bound_only;
  out.cls = s.value >= sigma0 ? SphereClass::U : SphereClass::V;
  return out;
}

enum class EstimateMethod { net_scan, sample_scan, local_descent };

inline const char* to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::net_scan: return "net-scan";
    case EstimateMethod::sample_scan: return "sample-scan";
    case EstimateMethod::local_descent: return "local-descent";
  }
  return "unknown";
}

struct Extremum {
  double value = 0.0;
  std::vector<double> direction;
  EstimateMethod method = EstimateMethod::sample_scan;
};

struct UVStats {
  double sigma0 = 0.0;
  std::size_t u_count = 0;
  std::size_t v_count = 0;
  double u_min = std::numeric_limits<double>::infinity();
  double v_min = std::numeric_limits<double>::infinity();
  bool tentative = false;
};

struct ProbeOptions {
  std::size_t samples = 2000;
  std::size_t descent_steps = 50;
  double initial_step = 0.1;
  double min_step = 1e-6;
  /// Optional net scanned in addition to the samples (not owned).
  const NetPoints* net = nullptr;
};

struct TrialOptions {
  ProbeOptions probes;
  double sigma0 = std::sqrt(2.0) * 0.25;
  /// Replaces the random draw, e.g. with a full enumeration matrix.
  std::optional<SignMatrix> signs;
  std::size_t max_dual_vertex_dim = kDefaultMaxDualVertexDim;
};

struct DistortionReport {
  std::uint64_t trial_seed = 0;
  std::size_t n = 0;
  std::size_t N = 0;
  double xi = 0.0;
  Extremum min;  // an upper bound on the true minimum over the sphere
  Extremum max;  // a lower bound on the true maximum
  double probe_min = 0.0;  // minimum over the probe set before descent
  std::optional<SupBound> certified_upper;
  std::size_t samples_used = 0;
  UVStats uv;
};

namespace detail {

/// Projected subgradient descent of |||.|||_N on the |||.|||-sphere: step
/// against a subgradient, renormalize by the exact norm, keep the point only
/// if the value drops, otherwise halve the step.
inline void descend(const NormInstance& inst, const EmpiricalNormInstance& emp, Extremum& best,
                    const ProbeOptions& opt) {
  std::vector<double> grad;
  double step = opt.initial_step;
  for (std::size_t it = 0; it < opt.descent_steps && step >= opt.min_step; ++it) {
    empirical_norm_subgradient(emp, best.direction, grad);
    const double gnorm = kernels::L2{}(grad.data(), grad.size());
    if (!(gnorm > 0.0)) break;
    const double scale = step * kernels::L2{}(best.direction.data(), best.direction.size()) / gnorm;
    std::vector<double> y(best.direction);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= scale * grad[i];
    const double ny = exact_unconditional_norm(inst, y);
    if (!(ny > 0.0)) {
      step /= 2.0;
      continue;
    }
    for (auto& v : y) v /= ny;
    const double fy = empirical_norm(emp, y);
    if (fy < best.value) {
      best.value = fy;
      best.direction = std::move(y);
      best.method = EstimateMethod::local_descent;
    } else {
      step /= 2.0;
    }
  }
}

inline void record_uv(const VectorFamily& family, std::span<const double> x, double value, UVStats& uv,
                      std::size_t max_vertex_dim) {
  const auto split = split_UV(family, x, uv.sigma0, max_vertex_dim);
  uv.tentative = uv.tentative || split.tentative;
  if (split.cls == SphereClass::U) {
    ++uv.u_count;
    uv.u_min = std::min(uv.u_min, value);
  } else {
    ++uv.v_count;
    uv.v_min = std::min(uv.v_min, value);
  }
}

}  // namespace detail

/// One trial: draw (or take) a sign matrix with N = round((1+xi)n) columns,
/// scan the probe set, refine the minimum by local descent.
/// Sub-streams: signs from derive_trial_seed(seed, 0), samples from
/// derive_trial_seed(seed, 1).
inline DistortionReport run_trial(const NormInstance& inst, double xi, std::uint64_t seed, const TrialOptions& opt) {
  const std::size_t n = inst.n();
  SignMatrix signs = opt.signs ? *opt.signs : sample_sign_matrix(n, columns_for_xi(n, xi), derive_trial_seed(seed, 0),
                                                                 kDefaultSignBitCap, SeedRecord{seed, 0});
  EmpiricalNormInstance emp(inst.family(), std::move(signs));

  DistortionReport rep;
  rep.trial_seed = seed;
  rep.n = n;
  rep.N = emp.N();
  rep.xi = emp.xi();
  rep.uv.sigma0 = opt.sigma0;
  rep.min.value = std::numeric_limits<double>::infinity();
  rep.max.value = -std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<double>& x, EstimateMethod method) {
    const double v = empirical_norm(emp, x);
    ++rep.samples_used;
    if (v < rep.min.value) rep.min = {v, x, method};
    if (v > rep.max.value) rep.max = {v, x, method};
    detail::record_uv(inst.family(), x, v, rep.uv, opt.max_dual_vertex_dim);
  };

  if (opt.probes.net) {
    for (const auto& p : opt.probes.net->points) consider(p, EstimateMethod::net_scan);
    if (opt.probes.net->theta <= 0.5) rep.certified_upper = certified_sup_bound(emp, *opt.probes.net);
  }
  for (const auto& x : sphere_sample(inst, opt.probes.samples, derive_trial_seed(seed, 1))) {
    consider(x, EstimateMethod::sample_scan);
  }
  if (rep.samples_used == 0) throw Error(ErrorKind::invalid_argument, "trial has an empty probe set");

  rep.probe_min = rep.min.value;
  if (opt.probes.descent_steps > 0) {
    detail::descend(inst, emp, rep.min, opt.probes);
    if (rep.min.method == EstimateMethod::local_descent) {
      detail::record_uv(inst.family(), rep.min.direction, rep.min.value, rep.uv, opt.max_dual_vertex_dim);
    }
  }
  return rep;
}

/// Trials t = 0..count-1 with seeds derive_trial_seed(master, t), in trial order.
inline std::vector<DistortionReport> run_trials(const NormInstance& inst, double xi, std::uint64_t master,
                                                std::size_t count, const TrialOptions& opt, unsigned threads = 1) {
  std::vector<DistortionReport> out(count);
  parallel_for(count, threads, [&](std::size_t t) {
    try {
      out[t] = run_trial(inst, xi, derive_trial_seed(master, t), opt);
    } catch (const Error& e) {
      throw Error(e.kind(), "trial " + std::to_string(t) + ": " + e.message(), t);
    }
  });
  return out;
}

struct FailureFragment {
  double xi = 0.0;
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double frequency = 0.0;
  double c_target = 0.0;
  double C_target = 0.0;
};

/// Frequency of {min < c_target or max > C_target} among the reports.
inline FailureFragment failure_frequency(std::span<const DistortionReport> reports, double c_target,
                                         double C_target) {
  FailureFragment out;
  out.c_target = c_target;
  out.C_target = C_target;
  out.trials = reports.size();
  for (const auto& r : reports) {
    out.n = r.n;
    out.N = r.N;
    out.xi = r.xi;
    if (r.min.value < c_target || r.max.value > C_target) ++out.failures;
  }
  out.frequency = out.trials ? static_cast<double>(out.failures) / static_cast<double>(out.trials) : 0.0;
  return out;
}

inline FailureFragment failure_probability(const NormInstance& inst, double xi, std::size_t trials, double c_target,
                                           double C_target, std::uint64_t seed, const TrialOptions& opt,
                                           unsigned threads = 1) {
  if (trials == 0) throw Error(ErrorKind::invalid_argument, "failure_probability needs trials >= 1");
  const auto reports = run_trials(inst, xi, seed, trials, opt, threads);
  return failure_frequency(reports, c_target, C_target);
}

struct Targets {
  double c_target = 0.0;
  double C_target = 0.0;
};

/// c_target = lower quantile of the minima, C_target = upper quantile of the maxima.
inline Targets calibrate_targets(std::span<const DistortionReport> reports, double lower_q = 0.05,
                                 double upper_q = 0.95) {
  std::vector<double> mins, maxs;
  for (const auto& r : reports) {
    mins.push_back(r.min.value);
    maxs.push_back(r.max.value);
  }
  return {quantile(mins, lower_q), quantile(maxs, upper_q)};
}

struct XiRow {
  double xi = 0.0;
  std::size_t N = 0;
  Quartiles min;
  Quartiles max;
  double median_ratio = 0.0;  // median over trials of max/min
  std::vector<DistortionReport> trials;
};

inline constexpr const char* kConstantsNote =
    "The universal constants c, c', C, C', C'', c1..c4, C1..C4 have no published numeric values; "
    "every quantity in this profile is an empirical estimate.";

struct ConstantsProfile {
  std::vector<XiRow> rows;
  /// Least-squares slope of log(median min) against log(xi) over rows with
  /// xi < 1 (NaN with fewer than two such rows); compared against 2.
  double small_xi_log_slope = std::numeric_limits<double>::quiet_NaN();
  std::string note = kConstantsNote;
};

inline XiRow summarize_row(double xi, std::vector<DistortionReport> reports) {
  XiRow row;
  row.xi = xi;
  std::vector<double> mins, maxs, ratios;
  for (const auto& r : reports) {
    row.N = r.N;
    mins.push_back(r.min.value);
    maxs.push_back(r.max.value);
    ratios.push_back(r.min.value > 0.0 ? r.max.value / r.min.value : std::numeric_limits<double>::infinity());
  }
  row.min = quartiles(mins);
  row.max = quartiles(maxs);
  row.median_ratio = quantile(ratios, 0.5);
  row.trials = std::move(reports);
  return row;
}

/// Trial t of every row uses seed derive_trial_seed(seed, t), so rows share
/// their random streams and a repeated xi reproduces its row exactly.
inline ConstantsProfile xi_sweep(const NormInstance& inst, std::span<const double> xi_list, std::size_t trials,
                                 std::uint64_t seed, const TrialOptions& opt, unsigned threads = 1) {
  if (xi_list.empty()) throw Error(ErrorKind::invalid_argument, "xi_sweep needs a nonempty xi list");
  ConstantsProfile profile;
  std::vector<double> lx, ly;
  for (double xi : xi_list) {
    profile.rows.push_back(summarize_row(xi, run_trials(inst, xi, seed, trials, opt, threads)));
    const auto& row = profile.rows.back();
    if (xi > 0.0 && xi < 1.0 && row.min.median > 0.0) {
      lx.push_back(std::log(xi));
      ly.push_back(std::log(row.min.median));
    }
  }
  profile.small_xi_log_slope = fit_line(lx, ly).slope;
  return profile;
}

}  // namespace normlab
