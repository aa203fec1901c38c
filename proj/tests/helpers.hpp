#pragma once

#include <cmath>
#include <functional>
#include <set>
#include <random>
#include <vector>

#include "normlab/normlab.hpp"
#include "oracles.hpp"

namespace testing_support {

/// The oracle norm matching a NormSpec, built from the definition only.
inline std::function<double(const oracle::Vec&)> oracle_norm(const normlab::NormSpec& s) {
  if (s.kind() == normlab::SpaceKind::polytope) {
    oracle::Mat fs;
    for (std::size_t f = 0; f < s.functional_count(); ++f) fs.emplace_back(s.functional(f).begin(), s.functional(f).end());
    return [fs](const oracle::Vec& u) { return oracle::polytope_norm(fs, u); };
  }
  const double p = s.p();
  return [p](const oracle::Vec& u) { return oracle::lp_norm(u, p); };
}

inline std::vector<double> gaussian(normlab::Rng& rng, std::size_t n) { return normlab::gaussian_vector(rng, n); }

inline double uniform(normlab::Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_int(normlab::Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// L1, L2 or Linf of dimension m, chosen by k mod 3.
inline normlab::NormSpec menu_space(std::size_t k, std::size_t m) {
  switch (k % 3) {
    case 0: return normlab::NormSpec::lp(1.0, m);
    case 1: return normlab::NormSpec::lp(2.0, m);
    default: return normlab::NormSpec::linf(m);
  }
}

inline std::vector<std::vector<int>> columns_of(const normlab::SignMatrix& a) {
  std::vector<std::vector<int>> out(a.cols(), std::vector<int>(a.rows()));
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) out[j][i] = a(i, j);
  }
  return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing_support
