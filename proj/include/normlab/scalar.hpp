#pragma once

// The scalar case dim E = 1: rho_A(y) = (1/N) sum_j |<eps_j, y>| on the
// Euclidean unit sphere, with min/max estimates kappa_min, kappa_max.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/parallel.hpp"
#include "normlab/rng.hpp"
#include "normlab/signs.hpp"
#include "normlab/stats.hpp"

namespace normlab {

inline double scalar_empirical_norm(const SignMatrix& a, std::span<const double> y) {
  if (y.size() != a.rows()) {
    throw Error(ErrorKind::dimension_mismatch,
                "y has " + std::to_string(y.size()) + " entries, sign matrix has n = " + std::to_string(a.rows()));
  }
  CompensatedSum acc;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) dot += a(i, j) * y[i];
    acc.add(std::abs(dot));
  }
  return acc.value() / static_cast<double>(a.cols());
}

/// Largest singular value of the n x N sign matrix (symmetric eigensolver on
/// the n x n Gram matrix).
inline double sign_matrix_smax(const SignMatrix& a) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m * m.transpose(), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

inline std::size_t sign_matrix_rank(const SignMatrix& a) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  return static_cast<std::size_t>(lu.rank());
}

struct ScalarProbeOptions {
  std::size_t samples = 200;
  std::size_t restarts = 4;
  std::size_t descent_steps = 200;
  double initial_step = 0.1;
  double min_step = 1e-9;
};

struct ScalarTrialReport {
  std::size_t n = 0;
  std::size_t N = 0;
  double xi = 0.0;
  std::uint64_t seed = 0;
  double kappa_min = 0.0;  // best available: exact at n <= 2, else the estimate
  double kappa_max = 0.0;
  double kappa_max_certificate = 0.0;  // s_max(A) / sqrt(N)
  double kappa_min_estimate = 0.0;     // probes + descent, an upper bound on the min
  double kappa_max_estimate = 0.0;     // probes + ascent, a lower bound on the max
  std::optional<double> kappa_min_exact;
  std::optional<double> kappa_max_exact;
  std::vector<double> argmin;
  std::string min_method = "probe-descent";
  std::string max_method = "probe-ascent";
};

namespace detail {

/// Exact extrema of rho on the unit circle for n = 2. On each arc between
/// consecutive zeros of the rows, rho(t) = P cos t + Q sin t (scaled by 1/N),
/// a nonnegative sinusoid: the arc minimum sits at an endpoint and the arc
/// maximum at an endpoint or at t = atan2(Q, P).
inline std::pair<double, double> circle_extrema(const SignMatrix& a) {
  const std::size_t N = a.cols();
  auto rho = [&](double t) {
    const double y[2] = {std::cos(t), std::sin(t)};
    return scalar_empirical_norm(a, y);
  };
  std::vector<double> breaks;
  for (std::size_t j = 0; j < N; ++j) {
    // zero of a cos t + b sin t on [0, pi)
    double t = std::atan2(-static_cast<double>(a(0, j)), static_cast<double>(a(1, j)));
    if (t < 0.0) t += M_PI;
    if (t >= M_PI) t -= M_PI;
    breaks.push_back(t);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double x, double y) { return std::abs(x - y) < 1e-15; }),
               breaks.end());
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t c = 0; c < breaks.size(); ++c) {
    const double t0 = breaks[c];
    const double t1 = c + 1 < breaks.size() ? breaks[c + 1] : breaks.front() + M_PI;
    const double v0 = rho(t0);
    lo = std::min(lo, v0);
    hi = std::max(hi, v0);
    const double mid = 0.5 * (t0 + t1);
    double P = 0.0, Q = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double s = a(0, j) * std::cos(mid) + a(1, j) * std::sin(mid) >= 0.0 ? 1.0 : -1.0;
      P += s * a(0, j);
      Q += s * a(1, j);
    }
    double peak = std::atan2(Q, P);
    while (peak < t0) peak += 2.0 * M_PI;
    if (peak <= t1) hi = std::max(hi, std::hypot(P, Q) / static_cast<double>(N));
  }
  return {lo, hi};
}

/// Dense angular grid on [0, pi): an independent cross-check of the arcs.
inline std::pair<double, double> circle_grid_extrema(const SignMatrix& a, std::size_t angles = 100000) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < angles; ++k) {
    const double t = M_PI * static_cast<double>(k) / static_cast<double>(angles);
    const double y[2] = {std::cos(t), std::sin(t)};
    const double v = scalar_empirical_norm(a, y);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

inline void normalize_l2(std::vector<double>& y) {
  const double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
  for (auto& v : y) v /= ny;
}

/// rho together with the subgradient (1/N) sum_j sign(<eps_j, y>) eps_j.
inline double scalar_subgradient(const SignMatrix& a, std::span<const double> y, std::vector<double>& g) {
  g.assign(a.rows(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) dot += a(i, j) * y[i];
    total += std::abs(dot);
    const double s = dot > 0.0 ? 1.0 : (dot < 0.0 ? -1.0 : 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) g[i] += s * a(i, j);
  }
  for (auto& v : g) v /= static_cast<double>(a.cols());
  return total / static_cast<double>(a.cols());
}

}  // namespace detail

/// kappa_min by probes + projected subgradient descent from the best
/// `restarts` probes; kappa_max by probes + the monotone ascent
/// y <- A^T sign(A y) / |.|. For n <= 2 the sphere is handled exactly.
inline ScalarTrialReport scalar_min_max(const SignMatrix& a, const ScalarProbeOptions& opt, std::uint64_t seed) {
  const std::size_t n = a.rows();
  ScalarTrialReport rep;
  rep.n = n;
  rep.N = a.cols();
  rep.xi = a.xi();
  rep.seed = seed;
  rep.kappa_max_certificate = sign_matrix_smax(a) / std::sqrt(static_cast<double>(a.cols()));

  struct Probe {
    double value;
    std::vector<double> y;
  };
  std::vector<Probe> probes;
  Rng rng(seed);
  if (n == 1) {
    probes.push_back({scalar_empirical_norm(a, std::vector<double>{1.0}), {1.0}});
  }
  for (std::size_t s = 0; s < opt.samples; ++s) {
    auto y = gaussian_vector(rng, n);
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) continue;
    detail::normalize_l2(y);
    probes.push_back({scalar_empirical_norm(a, y), std::move(y)});
  }
  if (probes.empty()) throw Error(ErrorKind::invalid_argument, "scalar_min_max needs at least one probe");

  auto by_value = [](const Probe& l, const Probe& r) { return l.value < r.value; };
  std::sort(probes.begin(), probes.end(), by_value);
  const std::size_t starts = std::min(std::max<std::size_t>(opt.restarts, 1), probes.size());

  Probe best_min = probes.front();
  std::vector<double> g;
  for (std::size_t r = 0; r < starts; ++r) {
    Probe cur = probes[r];
    double step = opt.initial_step;
    for (std::size_t it = 0; it < opt.descent_steps && step >= opt.min_step; ++it) {
      detail::scalar_subgradient(a, cur.y, g);
      // tangential component
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[i] * cur.y[i];
      for (std::size_t i = 0; i < n; ++i) g[i] -= dot * cur.y[i];
      const double gn = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
      if (!(gn > 0.0)) break;
      std::vector<double> y(cur.y);
      for (std::size_t i = 0; i < n; ++i) y[i] -= step * g[i] / gn;
      detail::normalize_l2(y);
      const double v = scalar_empirical_norm(a, y);
      if (v < cur.value) {
        cur = {v, std::move(y)};
      } else {
        step /= 2.0;
      }
    }
    if (cur.value < best_min.value) best_min = std::move(cur);
  }

  double best_max = probes.back().value;
  for (std::size_t r = 0; r < starts; ++r) {
    Probe cur = probes[probes.size() - 1 - r];
    for (std::size_t it = 0; it < opt.descent_steps; ++it) {
      std::vector<double> y(n, 0.0);
      for (std::size_t j = 0; j < a.cols(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += a(i, j) * cur.y[i];
        const double s = dot >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) y[i] += s * a(i, j);
      }
      if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) break;
      detail::normalize_l2(y);
      const double v = scalar_empirical_norm(a, y);
      if (!(v > cur.value)) break;
      cur = {v, std::move(y)};
    }
    best_max = std::max(best_max, cur.value);
  }

  rep.kappa_min_estimate = best_min.value;
  rep.kappa_max_estimate = best_max;
  rep.argmin = best_min.y;
  rep.kappa_min = rep.kappa_min_estimate;
  rep.kappa_max = rep.kappa_max_estimate;

  if (n == 1) {
    rep.kappa_min_exact = rep.kappa_max_exact = probes.front().value;
  } else if (n == 2) {
    const auto [lo, hi] = detail::circle_extrema(a);
    const auto [glo, ghi] = detail::circle_grid_extrema(a);
    rep.kappa_min_exact = std::min(lo, glo);
    rep.kappa_max_exact = std::max(hi, ghi);
  }
  if (rep.kappa_min_exact) {
    rep.kappa_min = *rep.kappa_min_exact;
    rep.kappa_max = *rep.kappa_max_exact;
    rep.min_method = "exact-circle";
    rep.max_method = "exact-circle";
  }
  return rep;
}

struct ScalarRow {
  double xi = 0.0;
  std::size_t N = 0;
  bool within_statement_range = true;  // 0 < xi <= 1
  Quartiles kappa_min;
  Quartiles kappa_max;
  double frequency_below_tau = 0.0;
  std::vector<ScalarTrialReport> trials;
};

struct ScalarSweep {
  std::size_t n = 0;
  double tau = 0.0;
  std::vector<ScalarRow> rows;
  double small_xi_log_slope = std::numeric_limits<double>::quiet_NaN();
};

/// Trial t of every row draws its matrix from derive_trial_seed(seed', 0) and
/// its probes from derive_trial_seed(seed', 1), seed' = derive_trial_seed(seed, t).
inline ScalarSweep rudelson_sweep(std::size_t n, std::span<const double> xi_list, std::size_t trials,
                                  std::uint64_t seed, const ScalarProbeOptions& opt, double tau = 0.0,
                                  unsigned threads = 1) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "rudelson_sweep needs n >= 1");
  ScalarSweep out;
  out.n = n;
  out.tau = tau;
  std::vector<double> lx, ly;
  for (double xi : xi_list) {
    const double cols = std::round((1.0 + xi) * static_cast<double>(n));
    if (!(cols >= 1.0)) throw Error(ErrorKind::invalid_argument, "xi gives N < 1");
    ScalarRow row;
    row.xi = xi;
    row.N = static_cast<std::size_t>(cols);
    row.within_statement_range = xi > 0.0 && xi <= 1.0;
    row.trials.resize(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
      const std::uint64_t ts = derive_trial_seed(seed, t);
      const auto a = sample_sign_matrix(n, row.N, derive_trial_seed(ts, 0), kDefaultSignBitCap, SeedRecord{seed, t});
      row.trials[t] = scalar_min_max(a, opt, derive_trial_seed(ts, 1));
      row.trials[t].seed = ts;
    });
    std::vector<double> mins, maxs;
    std::size_t below = 0;
    for (const auto& r : row.trials) {
      mins.push_back(r.kappa_min);
      maxs.push_back(r.kappa_max);
      if (r.kappa_min <= tau) ++below;
    }
    row.kappa_min = quartiles(mins);
    row.kappa_max = quartiles(maxs);
    row.frequency_below_tau = trials ? static_cast<double>(below) / static_cast<double>(trials) : 0.0;
    if (xi > 0.0 && xi < 1.0 && row.kappa_min.median > 0.0) {
      lx.push_back(std::log(xi));
      ly.push_back(std::log(row.kappa_min.median));
    }
    out.rows.push_back(std::move(row));
  }
  out.small_xi_log_slope = fit_line(lx, ly).slope;
  return out;
}

}  // namespace normlab
