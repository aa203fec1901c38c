#pragma once

// theta-separated nets on the unit sphere of |||.||| and the geometric
// decomposition of a unit vector over a 1/2-net.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/rng.hpp"
#include "normlab/symmetrize.hpp"

namespace normlab {

enum class CoveringStatus { certified_small_n, heuristic };

inline const char* to_string(CoveringStatus s) {
  return s == CoveringStatus::certified_small_n ? "certified-small-n" : "heuristic";
}

inline constexpr double kSphereTolerance = 1e-9;

struct NetPoints {
  double theta = 0.5;
  std::vector<std::vector<double>> points;
  bool separation_certified = true;
  CoveringStatus covering_status = CoveringStatus::heuristic;
  std::size_t candidate_budget = 0;
};

inline std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

/// x / |||x|||; throws on x = 0.
inline std::vector<double> normalize_triple(const NormInstance& inst, std::vector<double> x) {
  const double nx = exact_unconditional_norm(inst, x);
  if (!(nx > 0.0)) throw Error(ErrorKind::invalid_argument, "cannot normalize the zero vector");
  for (auto& v : x) v /= nx;
  return x;
}

struct NearestPoint {
  std::size_t index = 0;
  double distance = std::numeric_limits<double>::infinity();
};

namespace detail {

/// ||v_i|| for each i. For unconditional norms
///   max_i |y_i| ||v_i||  <=  |||y|||  <=  sum_i |y_i| ||v_i||,
/// which lets distance scans skip most exact evaluations.
inline std::vector<double> coordinate_scales(const NormInstance& inst) {
  const auto& f = inst.family();
  std::vector<double> out(f.n());
  for (std::size_t i = 0; i < f.n(); ++i) out[i] = f.space()(f.vector(i));
  return out;
}

struct DistanceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline DistanceBounds distance_bounds(std::span<const double> scales, std::span<const double> a,
                                      std::span<const double> b) {
  DistanceBounds out;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double d = std::abs(a[i] - b[i]) * scales[i];
    out.lower = std::max(out.lower, d);
    out.upper += d;
  }
  return out;
}

}  // namespace detail

inline NearestPoint nearest_net_point(const NormInstance& inst, const NetPoints& net, std::span<const double> x) {
  const auto scales = detail::coordinate_scales(inst);
  NearestPoint best;
  for (std::size_t p = 0; p < net.points.size(); ++p) {
    if (detail::distance_bounds(scales, x, net.points[p]).lower >= best.distance) continue;
    const double d = exact_unconditional_norm(inst, difference(x, net.points[p]));
    if (d < best.distance) {
      best.distance = d;
      best.index = p;
    }
  }
  return best;
}

namespace detail {

/// Adds x when it is farther than theta from every net point.
inline bool insert_if_separated(const NormInstance& inst, std::span<const double> scales, NetPoints& net,
                                std::vector<double> x) {
  for (const auto& p : net.points) {
    const auto b = distance_bounds(scales, x, p);
    if (b.lower > net.theta) continue;
    if (b.upper <= net.theta) return false;
    if (exact_unconditional_norm(inst, difference(x, p)) <= net.theta) return false;
  }
  net.points.push_back(std::move(x));
  return true;
}

/// Deterministic grid on the Euclidean sphere for n <= 3: both points for
/// n = 1, 720 angles for n = 2, a 25 x 25 grid on each face of the cube
/// [-1, 1]^3 for n = 3.
inline std::vector<std::vector<double>> sphere_grid(std::size_t n) {
  std::vector<std::vector<double>> grid;
  if (n == 1) {
    grid = {{1.0}, {-1.0}};
  } else if (n == 2) {
    constexpr int kAngles = 720;
    for (int a = 0; a < kAngles; ++a) {
      const double t = 2.0 * M_PI * a / kAngles;
      grid.push_back({std::cos(t), std::sin(t)});
    }
  } else if (n == 3) {
    constexpr int kSide = 25;
    for (std::size_t axis = 0; axis < 3; ++axis) {
      for (double face : {-1.0, 1.0}) {
        for (int a = 0; a < kSide; ++a) {
          for (int b = 0; b < kSide; ++b) {
            std::vector<double> x(3);
            x[axis] = face;
            x[(axis + 1) % 3] = -1.0 + 2.0 * a / (kSide - 1);
            x[(axis + 2) % 3] = -1.0 + 2.0 * b / (kSide - 1);
            grid.push_back(std::move(x));
          }
        }
      }
    }
  }
  return grid;
}

}  // namespace detail

/// Greedy maximal theta-separated set. Candidates are +/- e_i, then Gaussian
/// directions; construction stops after `budget` consecutive rejections
/// (budget 0 means 50 * |net|). For n <= 3 a grid pass inserts every
/// uncovered grid direction and marks covering as certified.
inline NetPoints build_net(const NormInstance& inst, double theta, std::size_t budget, std::uint64_t seed) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error(ErrorKind::invalid_argument, "net radius theta must lie in (0, 1]");
  const std::size_t n = inst.n();
  const auto scales = detail::coordinate_scales(inst);
  NetPoints net;
  net.theta = theta;
  net.candidate_budget = budget;

  for (std::size_t i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> e(n, 0.0);
      e[i] = s;
      detail::insert_if_separated(inst, scales, net, normalize_triple(inst, std::move(e)));
    }
  }

  Rng rng(seed);
  std::size_t rejected = 0;
  for (;;) {
    const std::size_t limit = budget ? budget : 50 * std::max<std::size_t>(net.points.size(), 1);
    if (rejected >= limit) break;
    auto x = gaussian_vector(rng, n);
    if (kernels::L2{}(x.data(), n) == 0.0) continue;
    if (detail::insert_if_separated(inst, scales, net, normalize_triple(inst, std::move(x)))) {
      rejected = 0;
    } else {
      ++rejected;
    }
  }

  if (n <= 3) {
    for (auto& g : detail::sphere_grid(n)) {
      detail::insert_if_separated(inst, scales, net, normalize_triple(inst, std::move(g)));
    }
    net.covering_status = CoveringStatus::certified_small_n;
  }
  return net;
}

/// Exact check that all pairwise distances exceed theta.
inline double min_pairwise_distance(const NormInstance& inst, const NetPoints& net) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < net.points.size(); ++a) {
    for (std::size_t b = a + 1; b < net.points.size(); ++b) {
      best = std::min(best, exact_unconditional_norm(inst, difference(net.points[a], net.points[b])));
    }
  }
  return best;
}

struct NetDecomposition {
  std::vector<double> coefficients;       // a_1..a_K, |a_k| <= 2^{1-k}
  std::vector<std::size_t> point_indices; // x^(k) as indices into the net
  double residual_norm = 0.0;             // |||x - sum_k a_k x^(k)|||
};

/// Residual peeling: r_0 = x, a_k = |||r_{k-1}|||, x^(k) nearest net point to
/// r_{k-1}/a_k, r_k = r_{k-1} - a_k x^(k). Each step at least halves the
/// residual as long as the net covers r_{k-1}/a_k within 1/2.
inline NetDecomposition net_decompose(const NormInstance& inst, const NetPoints& net, std::span<const double> x,
                                      std::size_t K) {
  if (net.theta > 0.5) throw Error(ErrorKind::invalid_argument, "decomposition needs a net with theta <= 1/2");
  if (net.points.empty()) throw Error(ErrorKind::invalid_argument, "empty net");
  const double nx = exact_unconditional_norm(inst, x);
  if (std::abs(nx - 1.0) > kSphereTolerance) {
    throw Error(ErrorKind::invalid_argument, "net_decompose needs |||x||| = 1, got " + std::to_string(nx));
  }
  NetDecomposition out;
  std::vector<double> r(x.begin(), x.end());
  double a = nx;
  for (std::size_t k = 0; k < K && a > 0.0; ++k) {
    std::vector<double> dir(r);
    for (auto& v : dir) v /= a;
    const auto nearest = nearest_net_point(inst, net, dir);
    if (nearest.distance > 0.5) throw CoveringViolation(dir, nearest.distance);
    out.coefficients.push_back(a);
    out.point_indices.push_back(nearest.index);
    const auto& p = net.points[nearest.index];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= a * p[i];
    a = exact_unconditional_norm(inst, r);
  }
  out.residual_norm = a;
  return out;
}

struct SupBound {
  double value = 0.0;  // 2 * max over the net of |||x|||_N
  double net_max = 0.0;
  CoveringStatus covering_status = CoveringStatus::heuristic;
};

/// Upper bound on sup_{|||x|||=1} |||x|||_N, valid when the net covers the
/// sphere within 1/2.
inline SupBound certified_sup_bound(const EmpiricalNormInstance& inst, const NetPoints& net) {
  if (net.theta > 0.5) throw Error(ErrorKind::invalid_argument, "sup bound needs a net with theta <= 1/2");
  SupBound out;
  out.covering_status = net.covering_status;
  for (const auto& p : net.points) out.net_max = std::max(out.net_max, empirical_norm(inst, p));
  out.value = 2.0 * out.net_max;
  return out;
}

}  // namespace normlab
