#pragma once

// The unconditional norm |||x||| = E ||sum_i eps_i x_i v_i|| (exact, by
// enumeration) and its sampled counterpart
// |||x|||_N = (1/N) sum_j ||sum_i eps_ij x_i v_i||.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/parallel.hpp"
#include "normlab/signs.hpp"
#include "normlab/spaces.hpp"
#include "normlab/stats.hpp"

namespace normlab {

namespace detail {

inline void require_coefficients(std::span<const double> x, std::size_t n) {
  if (x.size() != n) {
    throw Error(ErrorKind::dimension_mismatch,
                "coefficient vector has " + std::to_string(x.size()) + " entries, family has n = " + std::to_string(n));
  }
  require_finite(x, "coefficient vector");
}

/// w_i = x_i v_i, stored column-major (m x n).
inline std::vector<double> weighted_columns(const VectorFamily& family, std::span<const double> x) {
  const std::size_t m = family.m();
  std::vector<double> w(family.data().begin(), family.data().end());
  for (std::size_t i = 0; i < family.n(); ++i) {
    for (std::size_t k = 0; k < m; ++k) w[i * m + k] *= x[i];
  }
  return w;
}

inline constexpr std::uint64_t kGrayChunk = std::uint64_t{1} << 12;

/// Compensated sum of ||sum_i eps_i w_i|| over the Gray-code patterns
/// [begin, end) of the first n-1 signs; the last sign is pinned to +1 since
/// eps and -eps give the same norm.
template <class Norm>
double gray_chunk_sum(Norm norm, const double* w, std::size_t n, std::size_t m, std::uint64_t begin,
                      std::uint64_t end, std::vector<double>& s) {
  const std::uint64_t gray = begin ^ (begin >> 1);
  for (std::size_t k = 0; k < m; ++k) s[k] = w[(n - 1) * m + k];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double sign = (gray >> i) & 1u ? -1.0 : 1.0;
    for (std::size_t k = 0; k < m; ++k) s[k] += sign * w[i * m + k];
  }
  std::uint64_t minus = gray;  // bit i set <=> eps_i = -1
  CompensatedSum acc;
  for (std::uint64_t idx = begin;;) {
    acc.add(norm(s.data(), m));
    if (++idx == end) break;
    const auto bit = static_cast<std::size_t>(std::countr_zero(idx));
    // eps_bit flips; the sum moves by -2 * eps_bit(old) * w_bit
    const double delta = (minus >> bit) & 1u ? 2.0 : -2.0;
    const double* wb = w + bit * m;
    for (std::size_t k = 0; k < m; ++k) s[k] += delta * wb[k];
    minus ^= std::uint64_t{1} << bit;
  }
  return acc.value();
}

/// (1/2^{n-1}) sum over sign patterns of ||sum_i eps_i w_i||. The pattern
/// range is cut into fixed chunks reduced in order, so the result does not
/// depend on `threads`.
inline double sign_average(const NormSpec& space, std::span<const double> w, std::size_t n, unsigned threads) {
  const std::size_t m = space.dim();
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  const std::uint64_t chunks = (total + kGrayChunk - 1) / kGrayChunk;
  std::vector<double> partial(chunks, 0.0);
  space.visit([&](auto norm) {
    parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
      std::vector<double> s(m);
      const std::uint64_t begin = c * kGrayChunk;
      const std::uint64_t end = std::min(total, begin + kGrayChunk);
      partial[c] = gray_chunk_sum(norm, w.data(), n, m, begin, end, s);
    });
    return 0;
  });
  CompensatedSum acc;
  for (double p : partial) acc.add(p);
  return acc.value() / static_cast<double>(total);
}

}  // namespace detail

/// The map x -> |||x||| for a validated family.
class NormInstance {
 public:
  explicit NormInstance(VectorFamily family, std::size_t enum_cap = kDefaultEnumCap)
      : family_(std::move(family)), enum_cap_(enum_cap) {}

  const VectorFamily& family() const noexcept { return family_; }
  const NormSpec& space() const noexcept { return family_.space(); }
  std::size_t n() const noexcept { return family_.n(); }
  std::size_t enum_cap() const noexcept { return enum_cap_; }

 private:
  VectorFamily family_;
  std::size_t enum_cap_;
};

/// |||x||| = 2^{-n} sum_eps ||sum_i eps_i x_i v_i||, exact up to rounding.
inline double exact_unconditional_norm(const NormInstance& inst, std::span<const double> x, unsigned threads = 1) {
  const std::size_t n = inst.n();
  detail::require_coefficients(x, n);
  if (n > inst.enum_cap() || n > 63) {
    throw Error(ErrorKind::capacity,
                "exact norm needs n <= " + std::to_string(inst.enum_cap()) + ", got n = " + std::to_string(n));
  }
  const auto w = detail::weighted_columns(inst.family(), x);
  return detail::sign_average(inst.space(), w, n, threads);
}

/// |||x|||_N for a fixed sign matrix.
class EmpiricalNormInstance {
 public:
  EmpiricalNormInstance(VectorFamily family, SignMatrix signs) : family_(std::move(family)), signs_(std::move(signs)) {
    if (signs_.rows() != family_.n()) {
      throw Error(ErrorKind::dimension_mismatch, "sign matrix has " + std::to_string(signs_.rows()) +
                                                     " rows, family has n = " + std::to_string(family_.n()));
    }
  }

  const VectorFamily& family() const noexcept { return family_; }
  const NormSpec& space() const noexcept { return family_.space(); }
  const SignMatrix& signs() const noexcept { return signs_; }
  std::size_t n() const noexcept { return family_.n(); }
  std::size_t N() const noexcept { return signs_.cols(); }
  double xi() const noexcept { return signs_.xi(); }

 private:
  VectorFamily family_;
  SignMatrix signs_;
};

namespace detail {

/// Column sums u_j = sum_i eps_ij w_i, written into `u` (m x N column-major).
inline void signed_column_sums(const EmpiricalNormInstance& inst, std::span<const double> w, std::vector<double>& u) {
  const std::size_t n = inst.n(), m = inst.family().m(), N = inst.N();
  u.assign(m * N, 0.0);
  const auto& a = inst.signs();
  for (std::size_t j = 0; j < N; ++j) {
    double* uj = u.data() + j * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = a(i, j);
      const double* wi = w.data() + i * m;
      for (std::size_t k = 0; k < m; ++k) uj[k] += sign * wi[k];
    }
  }
}

}  // namespace detail

inline double empirical_norm(const EmpiricalNormInstance& inst, std::span<const double> x) {
  detail::require_coefficients(x, inst.n());
  const auto w = detail::weighted_columns(inst.family(), x);
  std::vector<double> u;
  detail::signed_column_sums(inst, w, u);
  const std::size_t m = inst.family().m();
  CompensatedSum acc;
  inst.space().visit([&](auto norm) {
    for (std::size_t j = 0; j < inst.N(); ++j) acc.add(norm(u.data() + j * m, m));
    return 0;
  });
  return acc.value() / static_cast<double>(inst.N());
}

inline std::vector<double> batch_empirical_norm(const EmpiricalNormInstance& inst,
                                                std::span<const std::vector<double>> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(empirical_norm(inst, x));
  return out;
}

/// |||x|||_N together with a subgradient g in R^n:
/// g_i = (1/N) sum_j eps_ij <phi_j, v_i>, phi_j norming u_j.
inline double empirical_norm_subgradient(const EmpiricalNormInstance& inst, std::span<const double> x,
                                         std::vector<double>& grad) {
  detail::require_coefficients(x, inst.n());
  const std::size_t n = inst.n(), m = inst.family().m(), N = inst.N();
  const auto w = detail::weighted_columns(inst.family(), x);
  std::vector<double> u;
  detail::signed_column_sums(inst, w, u);
  grad.assign(n, 0.0);
  CompensatedSum acc;
  const auto& a = inst.signs();
  for (std::size_t j = 0; j < N; ++j) {
    std::span<const double> uj(u.data() + j * m, m);
    acc.add(inst.space()(uj));
    const auto phi = norming_functional(inst.space(), uj);
    for (std::size_t i = 0; i < n; ++i) {
      const auto vi = inst.family().vector(i);
      double dot = 0.0;
      for (std::size_t k = 0; k < m; ++k) dot += phi[k] * vi[k];
      grad[i] += a(i, j) * dot;
    }
  }
  for (auto& g : grad) g /= static_cast<double>(N);
  return acc.value() / static_cast<double>(N);
}

}  // namespace normlab
