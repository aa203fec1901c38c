#pragma once

// Weak variance sigma(x) = sup { sqrt(sum_i phi(x_i v_i)^2) : ||phi||_* <= 1 }
// and the Khinchin comparison between sigma and |||.|||.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/rng.hpp"
#include "normlab/spaces.hpp"
#include "normlab/symmetrize.hpp"

namespace normlab {

enum class SigmaMethod { spectral, vertex_enumeration, extreme_point_scan };

inline const char* to_string(SigmaMethod m) {
  switch (m) {
    case SigmaMethod::spectral: return "spectral";
    case SigmaMethod::vertex_enumeration: return "vertex-enumeration";
    case SigmaMethod::extreme_point_scan: return "extreme-point-scan";
  }
  return "unknown";
}

struct SigmaResult {
  double value = 0.0;
  SigmaMethod method = SigmaMethod::spectral;
  /// Maximizing functional phi, when the maximum is attained on a known point.
  std::optional<std::vector<double>> certificate;
  /// Set when the space has no exact dual description we can search; value
  /// is then only a lower bound on sigma.
  bool lower_bound_only = false;
};

namespace detail {

/// sum_i <phi, w_i>^2 for column-major w (m x n).
inline double functional_energy(std::span<const double> phi, std::span<const double> w, std::size_t n) {
  const std::size_t m = phi.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t k = 0; k < m; ++k) dot += phi[k] * w[i * m + k];
    s += dot * dot;
  }
  return s;
}

/// Conditional-gradient ascent of phi -> sum_i <phi, w_i>^2 over the dual
/// ball: phi <- norming functional of A A^T phi. Every iterate is feasible,
/// so the best value seen is a valid lower bound.
inline SigmaResult sigma_by_norming_ascent(const NormSpec& space, std::span<const double> w, std::size_t n) {
  const std::size_t m = space.dim();
  std::vector<std::vector<double>> starts;
  for (std::size_t i = 0; i < n; ++i) starts.push_back(norming_functional(space, w.subspan(i * m, m)));
  Rng rng(0x5167a);
  for (int r = 0; r < 8; ++r) starts.push_back(norming_functional(space, gaussian_vector(rng, m)));

  SigmaResult best;
  best.method = SigmaMethod::extreme_point_scan;
  best.lower_bound_only = true;
  double best_energy = -1.0;
  std::vector<double> g(m);
  for (auto phi : starts) {
    double energy = functional_energy(phi, w, n);
    for (int it = 0; it < 500; ++it) {
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t k = 0; k < m; ++k) dot += phi[k] * w[i * m + k];
        for (std::size_t k = 0; k < m; ++k) g[k] += dot * w[i * m + k];
      }
      auto next = norming_functional(space, g);
      const double next_energy = functional_energy(next, w, n);
      if (!(next_energy > energy * (1.0 + 1e-15))) break;
      phi = std::move(next);
      energy = next_energy;
    }
    if (energy > best_energy) {
      best_energy = energy;
      best.certificate = phi;
    }
  }
  best.value = std::sqrt(std::max(best_energy, 0.0));
  return best;
}

}  // namespace detail

/// sigma(x) = sigma(x_1 v_1, ..., x_n v_n).
///   L2        spectral: largest singular value of [x_1 v_1 ... x_n v_n]
///   Linf      scan of the dual vertices +/- e_k
///   L1        enumeration of the 2^m dual-cube vertices (m <= max_vertex_dim)
///   polytope  scan of the stored functionals
/// Other spaces (and L1 above the vertex cap) return a flagged lower bound.
inline SigmaResult sigma(const VectorFamily& family, std::span<const double> x,
                         std::size_t max_vertex_dim = kDefaultMaxDualVertexDim) {
  const std::size_t n = family.n(), m = family.m();
  detail::require_coefficients(x, n);
  const auto w = detail::weighted_columns(family, x);
  const auto& space = family.space();
  SigmaResult out;

  if (space.is_l2()) {
    Eigen::Map<const Eigen::MatrixXd> a(w.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    out.method = SigmaMethod::spectral;
    out.value = svd.singularValues()(0);
    std::vector<double> u(m);
    for (std::size_t k = 0; k < m; ++k) u[k] = svd.matrixU()(static_cast<Eigen::Index>(k), 0);
    out.certificate = std::move(u);
    return out;
  }

  if (space.is_linf()) {
    std::size_t best = 0;
    double best_energy = -1.0;
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w[i * m + k] * w[i * m + k];
      if (s > best_energy) {
        best_energy = s;
        best = k;
      }
    }
    std::vector<double> e(m, 0.0);
    e[best] = 1.0;
    out.method = SigmaMethod::extreme_point_scan;
    out.value = std::sqrt(best_energy);
    out.certificate = std::move(e);
    return out;
  }

  if (space.kind() == SpaceKind::polytope) {
    std::size_t best = 0;
    double best_energy = -1.0;
    for (std::size_t f = 0; f < space.functional_count(); ++f) {
      const double s = detail::functional_energy(space.functional(f), w, n);
      if (s > best_energy) {
        best_energy = s;
        best = f;
      }
    }
    auto phi = space.functional(best);
    out.method = SigmaMethod::extreme_point_scan;
    out.value = std::sqrt(best_energy);
    out.certificate = std::vector<double>(phi.begin(), phi.end());
    return out;
  }

  if (space.is_l1() && m <= max_vertex_dim) {
    // Gray code over phi_0..phi_{m-2}; phi_{m-1} = +1 (phi and -phi agree).
    std::vector<double> proj(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < m; ++k) proj[i] += w[i * m + k];
    }
    const std::uint64_t total = std::uint64_t{1} << (m - 1);
    std::uint64_t minus = 0, best_minus = 0;
    double best_energy = -1.0;
    for (std::uint64_t idx = 0;;) {
      double s = 0.0;
      for (double p : proj) s += p * p;
      if (s > best_energy) {
        best_energy = s;
        best_minus = minus;
      }
      if (++idx == total) break;
      const auto bit = static_cast<std::size_t>(std::countr_zero(idx));
      const double delta = (minus >> bit) & 1u ? 2.0 : -2.0;
      for (std::size_t i = 0; i < n; ++i) proj[i] += delta * w[i * m + bit];
      minus ^= std::uint64_t{1} << bit;
    }
    std::vector<double> phi(m);
    for (std::size_t k = 0; k < m; ++k) phi[k] = (best_minus >> k) & 1u ? -1.0 : 1.0;
    out.method = SigmaMethod::vertex_enumeration;
    out.value = std::sqrt(detail::functional_energy(phi, w, n));
    out.certificate = std::move(phi);
    return out;
  }

  return detail::sigma_by_norming_ascent(space, w, n);
}

struct KhinchinBounds {
  double lower = 0.0;  // |y|_2 / sqrt(2)
  double exact = 0.0;  // E |sum_i eps_i y_i|
  double upper = 0.0;  // |y|_2
};

inline KhinchinBounds khinchin_bounds(std::span<const double> y, std::size_t cap = kDefaultEnumCap) {
  const std::size_t n = y.size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "khinchin_bounds needs a nonempty vector");
  if (n > cap || n > 63) throw Error(ErrorKind::capacity, "khinchin enumeration needs n <= " + std::to_string(cap));
  require_finite(y, "y");
  KhinchinBounds out;
  out.upper = kernels::L2{}(y.data(), n);
  out.lower = out.upper / std::sqrt(2.0);
  out.exact = detail::sign_average(NormSpec::lp(1.0, 1), y, n, 1);
  return out;
}

struct Claim1Result {
  double sigma = 0.0;
  double triple_norm = 0.0;
  double ratio = 0.0;  // sigma / |||x|||, 0 at x = 0
  bool lower_bound_only = false;
};

/// sigma(x) against |||x|||; the ratio never exceeds sqrt(2).
inline Claim1Result claim1_check(const NormInstance& inst, std::span<const double> x) {
  const auto s = sigma(inst.family(), x);
  Claim1Result out;
  out.sigma = s.value;
  out.lower_bound_only = s.lower_bound_only;
  out.triple_norm = exact_unconditional_norm(inst, x);
  out.ratio = out.triple_norm > 0.0 ? out.sigma / out.triple_norm : 0.0;
  return out;
}

}  // namespace normlab
