#pragma once

// Exact law of X = ||sum_i eps_i x_i v_i|| by enumeration, its subgaussian
// tail shape, the median/mean gap, and Monte Carlo amplification of sample
// means.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/rng.hpp"
#include "normlab/stats.hpp"
#include "normlab/symmetrize.hpp"
#include "normlab/weakvar.hpp"

namespace normlab {

inline constexpr double kAtomMergeTolerance = 1e-12;

struct Atom {
  double value = 0.0;
  double probability = 0.0;
  std::uint64_t multiplicity = 0;  // number of sign patterns
};

struct ExactDistribution {
  std::vector<Atom> atoms;  // sorted by value
  double expectation = 0.0;
  double median = 0.0;  // lower median
  double variance = 0.0;
  double sigma = 0.0;
  bool sigma_lower_bound_only = false;

  double stddev() const { return std::sqrt(variance); }
};

/// All 2^n values of ||sum_i eps_i x_i v_i||, merged into atoms whose values
/// agree within 1e-12.
inline ExactDistribution exact_distribution(const VectorFamily& family, std::span<const double> x,
                                            std::size_t cap = kDefaultEnumCap,
                                            std::size_t max_vertex_dim = kDefaultMaxDualVertexDim) {
  const std::size_t n = family.n(), m = family.m();
  detail::require_coefficients(x, n);
  if (n > cap || n > 63) throw Error(ErrorKind::capacity, "exact distribution needs n <= " + std::to_string(cap));
  const auto w = detail::weighted_columns(family, x);

  // eps and -eps give the same value: enumerate the 2^{n-1} patterns with
  // eps_n = +1, each standing for two sign vectors.
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  std::vector<double> values;
  values.reserve(total);
  std::vector<double> s(w.begin() + static_cast<std::ptrdiff_t>((n - 1) * m), w.end());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) s[k] += w[i * m + k];
  }
  std::uint64_t minus = 0;
  family.space().visit([&](auto norm) {
    for (std::uint64_t idx = 0;;) {
      values.push_back(norm(s.data(), m));
      if (++idx == total) break;
      const auto bit = static_cast<std::size_t>(std::countr_zero(idx));
      const double delta = (minus >> bit) & 1u ? 2.0 : -2.0;
      for (std::size_t k = 0; k < m; ++k) s[k] += delta * w[bit * m + k];
      minus ^= std::uint64_t{1} << bit;
    }
    return 0;
  });
  std::sort(values.begin(), values.end());

  ExactDistribution dist;
  const double unit = 1.0 / static_cast<double>(total);
  for (std::size_t k = 0; k < values.size();) {
    std::size_t e = k;
    while (e < values.size() && values[e] - values[k] <= kAtomMergeTolerance) ++e;
    const auto count = static_cast<std::uint64_t>(e - k);
    dist.atoms.push_back({values[k], static_cast<double>(count) * unit, 2 * count});
    k = e;
  }

  CompensatedSum mean;
  for (const auto& a : dist.atoms) mean.add(a.probability * a.value);
  dist.expectation = mean.value();
  CompensatedSum var;
  for (const auto& a : dist.atoms) var.add(a.probability * (a.value - dist.expectation) * (a.value - dist.expectation));
  dist.variance = std::max(0.0, var.value());

  // lower median: smallest v with P(X <= v) >= 1/2 (exact in pattern counts)
  std::uint64_t cumulative = 0;
  for (const auto& a : dist.atoms) {
    cumulative += a.multiplicity / 2;
    if (2 * cumulative >= total) {
      dist.median = a.value;
      break;
    }
  }

  const auto sig = sigma(family, x, max_vertex_dim);
  dist.sigma = sig.value;
  dist.sigma_lower_bound_only = sig.lower_bound_only;
  return dist;
}

/// P(|X - E X| >= t), with a 1e-12 slack on the comparison.
inline double tail_probability(const ExactDistribution& dist, double t) {
  CompensatedSum p;
  for (const auto& a : dist.atoms) {
    if (std::abs(a.value - dist.expectation) >= t - kAtomMergeTolerance) p.add(a.probability);
  }
  return std::min(1.0, p.value());
}

struct TailPoint {
  double t = 0.0;
  double probability = 0.0;
};

struct TailFit {
  std::vector<TailPoint> points;
  /// log P ~ a - b (t / sigma)^2 over the points with P > 0.
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  bool fit_skipped = false;
  bool non_increasing = true;
};

/// Default grid: t = k * sigma / 4 up to the largest deviation from E X.
inline std::vector<double> default_t_grid(const ExactDistribution& dist) {
  double span = 0.0;
  for (const auto& a : dist.atoms) span = std::max(span, std::abs(a.value - dist.expectation));
  std::vector<double> grid;
  if (dist.sigma <= 0.0) return grid;
  for (double t = dist.sigma / 4.0; t <= span + 1e-12; t += dist.sigma / 4.0) grid.push_back(t);
  return grid;
}

inline TailFit tail_check(const ExactDistribution& dist, std::span<const double> t_grid) {
  TailFit fit;
  std::vector<double> t_sorted(t_grid.begin(), t_grid.end());
  std::sort(t_sorted.begin(), t_sorted.end());
  for (double t : t_sorted) fit.points.push_back({t, tail_probability(dist, t)});
  for (std::size_t k = 1; k < fit.points.size(); ++k) {
    if (fit.points[k].probability > fit.points[k - 1].probability) fit.non_increasing = false;
  }
  if (dist.atoms.size() < 2 || !(dist.sigma > 0.0)) {
    fit.fit_skipped = true;
    return fit;
  }
  std::vector<double> xs, ys;
  for (const auto& p : fit.points) {
    if (p.probability > 0.0) {
      xs.push_back((p.t / dist.sigma) * (p.t / dist.sigma));
      ys.push_back(std::log(p.probability));
    }
  }
  const auto line = fit_line(xs, ys);
  if (!std::isfinite(line.slope)) {
    fit.fit_skipped = true;
    return fit;
  }
  fit.a = line.intercept;
  fit.b = -line.slope;
  return fit;
}

struct MedianGap {
  double gap = 0.0;  // |Med X - E X|
  double stddev = 0.0;
  double ratio = 0.0;  // gap / stddev (0 when both vanish)
  bool within_stddev = true;
};

inline MedianGap median_vs_mean(const ExactDistribution& dist) {
  MedianGap out;
  out.gap = std::abs(dist.median - dist.expectation);
  out.stddev = dist.stddev();
  out.ratio = out.stddev > 0.0 ? out.gap / out.stddev : 0.0;
  out.within_stddev = out.gap <= out.stddev + 1e-12;
  return out;
}

struct AmplificationRow {
  std::size_t N = 0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double frequency = 0.0;
  double stderr_ = 0.0;
};

struct AmplificationTable {
  double t = 0.0;
  double expectation = 0.0;
  std::vector<AmplificationRow> rows;
  /// Slope of log(frequency) against N over rows with nonzero frequency;
  /// -inf when fewer than two such rows.
  double slope = -std::numeric_limits<double>::infinity();
  std::size_t nonzero_rows = 0;
  /// slope < 0 whenever at least three rows are nonzero (vacuous otherwise).
  bool slope_check = true;
};

/// Frequency of {(1/N) sum_j X_j >= t} over independent batches of N draws
/// from the exact law of X. Batch size N uses the stream
/// std::mt19937_64(derive_trial_seed(seed, N)).
inline AmplificationTable amplification_check(const ExactDistribution& dist, std::span<const std::size_t> N_list,
                                              double t, std::size_t trials, std::uint64_t seed) {
  if (!(t > dist.expectation)) {
    throw Error(ErrorKind::invalid_argument,
                "amplification needs t > E X = " + std::to_string(dist.expectation) + ", got t = " + std::to_string(t));
  }
  if (trials == 0) throw Error(ErrorKind::invalid_argument, "amplification needs trials >= 1");
  std::vector<double> cdf;
  double run = 0.0;
  for (const auto& a : dist.atoms) cdf.push_back(run += a.probability);
  cdf.back() = 1.0;

  AmplificationTable table;
  table.t = t;
  table.expectation = dist.expectation;
  std::vector<double> xs, ys;
  for (std::size_t N : N_list) {
    if (N == 0) throw Error(ErrorKind::invalid_argument, "batch size N must be positive");
    Rng rng(derive_trial_seed(seed, N));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    AmplificationRow row;
    row.N = N;
    row.trials = trials;
    for (std::size_t r = 0; r < trials; ++r) {
      double sum = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        const double u = unif(rng);
        const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        sum += dist.atoms[std::min(k, dist.atoms.size() - 1)].value;
      }
      if (sum / static_cast<double>(N) >= t) ++row.hits;
    }
    row.frequency = static_cast<double>(row.hits) / static_cast<double>(trials);
    row.stderr_ = std::sqrt(row.frequency * (1.0 - row.frequency) / static_cast<double>(trials));
    if (row.hits > 0) {
      xs.push_back(static_cast<double>(N));
      ys.push_back(std::log(row.frequency));
    }
    table.rows.push_back(row);
  }
  table.nonzero_rows = xs.size();
  if (xs.size() >= 2) table.slope = fit_line(xs, ys).slope;
  if (table.nonzero_rows >= 3) table.slope_check = table.slope < 0.0;
  return table;
}

/// Convenience overload: enumerate the law of ||sum eps_i x_i v_i|| first.
inline AmplificationTable amplification_check(const VectorFamily& family, std::span<const double> x,
                                              std::span<const std::size_t> N_list, double t, std::size_t trials,
                                              std::uint64_t seed) {
  return amplification_check(exact_distribution(family, x), N_list, t, trials, seed);
}

}  // namespace normlab
