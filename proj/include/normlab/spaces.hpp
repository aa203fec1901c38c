#pragma once

// Concrete finite-dimensional normed spaces E = (R^m, ||.||) and the vector
// families v_1..v_n that define the unconditional norm.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "normlab/error.hpp"

namespace normlab {

inline constexpr double kZeroVectorTolerance = 1e-12;
inline constexpr std::size_t kDefaultMaxDualVertexDim = 20;

enum class SpaceKind { lp, linf, polytope };

namespace kernels {

struct L1 {
  double operator()(const double* u, std::size_t m) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += std::abs(u[k]);
    return s;
  }
};

struct L2 {
  double operator()(const double* u, std::size_t m) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += u[k] * u[k];
    return std::sqrt(s);
  }
};

struct LInf {
  double operator()(const double* u, std::size_t m) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s = std::max(s, std::abs(u[k]));
    return s;
  }
};

struct Lp {
  double p;
  double operator()(const double* u, std::size_t m) const noexcept {
    const double scale = LInf{}(u, m);
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += std::pow(std::abs(u[k]) / scale, p);
    return scale * std::pow(s, 1.0 / p);
  }
};

// max_k |<phi_k, u>| over row-major functionals
struct Polytope {
  const double* functionals;
  std::size_t count;
  double operator()(const double* u, std::size_t m) const noexcept {
    double best = 0.0;
    for (std::size_t f = 0; f < count; ++f) {
      const double* phi = functionals + f * m;
      double dot = 0.0;
      for (std::size_t k = 0; k < m; ++k) dot += phi[k] * u[k];
      best = std::max(best, std::abs(dot));
    }
    return best;
  }
};

}  // namespace kernels

class NormSpec {
 public:
  static NormSpec lp(double p, std::size_t dim) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::invalid_argument, "Lp space needs finite p >= 1 (use linf for p = inf)");
    }
    require_dim(dim);
    NormSpec s;
    s.kind_ = SpaceKind::lp;
    s.p_ = p;
    s.dim_ = dim;
    return s;
  }

  static NormSpec linf(std::size_t dim) {
    require_dim(dim);
    NormSpec s;
    s.kind_ = SpaceKind::linf;
    s.p_ = std::numeric_limits<double>::infinity();
    s.dim_ = dim;
    return s;
  }

  /// Norm ||u|| = max_k |<phi_k, u>|. One representative per +/- pair is
  /// enough; the absolute value supplies the closure under negation.
  static NormSpec polytope(const std::vector<std::vector<double>>& functionals) {
    if (functionals.empty()) {
      throw Error(ErrorKind::invalid_argument, "polytope needs at least one functional");
    }
    const std::size_t dim = functionals.front().size();
    require_dim(dim);
    NormSpec s;
    s.kind_ = SpaceKind::polytope;
    s.p_ = 0.0;
    s.dim_ = dim;
    s.functionals_.reserve(functionals.size() * dim);
    for (std::size_t f = 0; f < functionals.size(); ++f) {
      if (functionals[f].size() != dim) {
        throw Error(ErrorKind::dimension_mismatch, "polytope functional has wrong length", f + 1);
      }
      for (double v : functionals[f]) {
        if (!std::isfinite(v)) throw Error(ErrorKind::non_finite, "polytope functional", f + 1);
        s.functionals_.push_back(v);
      }
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> phi(
        s.functionals_.data(), static_cast<Eigen::Index>(functionals.size()), static_cast<Eigen::Index>(dim));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(phi);
    lu.setThreshold(1e-10);
    if (static_cast<std::size_t>(lu.rank()) != dim) {
      throw Error(ErrorKind::invalid_argument, "polytope functionals do not span R^m; ||.|| would vanish on a nonzero vector");
    }
    return s;
  }

  SpaceKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  /// The exponent for Lp spaces (+inf for linf, 0 for polytopes).
  double p() const noexcept { return p_; }
  bool is_l1() const noexcept { return kind_ == SpaceKind::lp && p_ == 1.0; }
  bool is_l2() const noexcept { return kind_ == SpaceKind::lp && p_ == 2.0; }
  bool is_linf() const noexcept { return kind_ == SpaceKind::linf; }
  bool is_smooth_lp() const noexcept { return kind_ == SpaceKind::lp && p_ != 1.0 && p_ != 2.0; }

  std::size_t functional_count() const noexcept { return dim_ ? functionals_.size() / dim_ : 0; }
  std::span<const double> functional(std::size_t f) const { return {functionals_.data() + f * dim_, dim_}; }

  /// Calls f with a norm kernel specialized for this space.
  template <class F>
  decltype(auto) visit(F&& f) const {
    switch (kind_) {
      case SpaceKind::linf: return f(kernels::LInf{});
      case SpaceKind::polytope: return f(kernels::Polytope{functionals_.data(), functional_count()});
      case SpaceKind::lp: break;
    }
    if (p_ == 1.0) return f(kernels::L1{});
    if (p_ == 2.0) return f(kernels::L2{});
    return f(kernels::Lp{p_});
  }

  /// Unchecked evaluation; u must have dim() entries.
  double operator()(std::span<const double> u) const {
    return visit([&](auto norm) { return norm(u.data(), dim_); });
  }

  std::string describe() const {
    switch (kind_) {
      case SpaceKind::linf: return "linf(dim=" + std::to_string(dim_) + ")";
      case SpaceKind::polytope:
        return "polytope(dim=" + std::to_string(dim_) + ", functionals=" + std::to_string(functional_count()) + ")";
      case SpaceKind::lp: break;
    }
    return "lp(p=" + std::to_string(p_) + ", dim=" + std::to_string(dim_) + ")";
  }

  friend bool operator==(const NormSpec&, const NormSpec&) = default;

 private:
  NormSpec() = default;

  static void require_dim(std::size_t dim) {
    if (dim == 0) throw Error(ErrorKind::invalid_argument, "space dimension must be positive");
  }

  SpaceKind kind_ = SpaceKind::lp;
  double p_ = 2.0;
  std::size_t dim_ = 0;
  std::vector<double> functionals_;
};

inline void require_finite(std::span<const double> u, const char* what) {
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!std::isfinite(u[k])) throw Error(ErrorKind::non_finite, std::string(what) + " has a non-finite entry", k + 1);
  }
}

/// ||u|| with dimension and finiteness checks.
inline double norm_eval(const NormSpec& space, std::span<const double> u) {
  if (u.size() != space.dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "vector has " + std::to_string(u.size()) + " entries, space has dim " + std::to_string(space.dim()));
  }
  require_finite(u, "vector");
  return space(u);
}

/// A functional phi with ||phi||_* <= 1 and <phi, u> = ||u|| (zero for u = 0).
inline std::vector<double> norming_functional(const NormSpec& space, std::span<const double> u) {
  const std::size_t m = space.dim();
  std::vector<double> phi(m, 0.0);
  const double nu = space(u);
  if (nu == 0.0) return phi;
  auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  switch (space.kind()) {
    case SpaceKind::linf: {
      std::size_t best = 0;
      for (std::size_t k = 1; k < m; ++k) {
        if (std::abs(u[k]) > std::abs(u[best])) best = k;
      }
      phi[best] = sgn(u[best]);
      return phi;
    }
    case SpaceKind::polytope: {
      std::size_t best = 0;
      double best_dot = 0.0;
      for (std::size_t f = 0; f < space.functional_count(); ++f) {
        auto row = space.functional(f);
        double dot = 0.0;
        for (std::size_t k = 0; k < m; ++k) dot += row[k] * u[k];
        if (std::abs(dot) > std::abs(best_dot)) {
          best_dot = dot;
          best = f;
        }
      }
      auto row = space.functional(best);
      for (std::size_t k = 0; k < m; ++k) phi[k] = sgn(best_dot) * row[k];
      return phi;
    }
    case SpaceKind::lp: break;
  }
  const double p = space.p();
  if (p == 1.0) {
    for (std::size_t k = 0; k < m; ++k) phi[k] = sgn(u[k]);
  } else if (p == 2.0) {
    for (std::size_t k = 0; k < m; ++k) phi[k] = u[k] / nu;
  } else {
    for (std::size_t k = 0; k < m; ++k) phi[k] = sgn(u[k]) * std::pow(std::abs(u[k]) / nu, p - 1.0);
  }
  return phi;
}

/// ||phi||_* when it has a closed form (all Lp spaces). Polytope duals would
/// need a linear program and are not evaluated.
inline std::optional<double> dual_norm(const NormSpec& space, std::span<const double> phi) {
  switch (space.kind()) {
    case SpaceKind::linf: return kernels::L1{}(phi.data(), phi.size());
    case SpaceKind::polytope: return std::nullopt;
    case SpaceKind::lp: break;
  }
  const double p = space.p();
  if (p == 1.0) return kernels::LInf{}(phi.data(), phi.size());
  if (p == 2.0) return kernels::L2{}(phi.data(), phi.size());
  return kernels::Lp{p / (p - 1.0)}(phi.data(), phi.size());
}

enum class DualKind {
  vertices,   // exact finite list of extreme points of the dual ball
  lazy_cube,  // L1 dual cube {-1,1}^m, too large to materialize
  euclidean,  // L2: handled spectrally
  smooth_lp,  // 1 < p < inf, p != 2: norming map phi_u ~ sign(u)|u|^{p-1}
};

struct DualDescription {
  DualKind kind = DualKind::vertices;
  std::vector<std::vector<double>> vertices;
  double p = 0.0;
  std::size_t dim = 0;
};

/// Extreme points of the dual unit ball, when finitely describable.
inline DualDescription dual_extreme_points(const NormSpec& space, bool materialize = true,
                                           std::size_t max_vertex_dim = kDefaultMaxDualVertexDim) {
  DualDescription out;
  out.dim = space.dim();
  out.p = space.p();
  const std::size_t m = space.dim();
  switch (space.kind()) {
    case SpaceKind::linf:
      for (std::size_t k = 0; k < m; ++k) {
        for (double s : {1.0, -1.0}) {
          std::vector<double> e(m, 0.0);
          e[k] = s;
          out.vertices.push_back(std::move(e));
        }
      }
      return out;
    case SpaceKind::polytope:
      for (std::size_t f = 0; f < space.functional_count(); ++f) {
        auto row = space.functional(f);
        out.vertices.emplace_back(row.begin(), row.end());
        std::vector<double> neg(row.begin(), row.end());
        for (auto& v : neg) v = -v;
        out.vertices.push_back(std::move(neg));
      }
      return out;
    case SpaceKind::lp: break;
  }
  if (space.is_l2()) {
    out.kind = DualKind::euclidean;
    return out;
  }
  if (!space.is_l1()) {
    out.kind = DualKind::smooth_lp;
    return out;
  }
  if (m > max_vertex_dim) {
    if (materialize) {
      throw Error(ErrorKind::capacity, "L1 dual cube with m = " + std::to_string(m) + " exceeds the vertex cap " +
                                           std::to_string(max_vertex_dim));
    }
    out.kind = DualKind::lazy_cube;
    return out;
  }
  if (!materialize) {
    out.kind = DualKind::lazy_cube;
    return out;
  }
  const std::uint64_t count = std::uint64_t{1} << m;
  out.vertices.reserve(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = (mask >> k) & 1u ? -1.0 : 1.0;
    out.vertices.push_back(std::move(v));
  }
  return out;
}

/// The vectors v_1..v_n of E, stored column by column. Construction
/// validates that every v_i is nonzero.
class VectorFamily {
 public:
  VectorFamily(NormSpec space, const std::vector<std::vector<double>>& vectors) : space_(std::move(space)) {
    if (vectors.empty()) throw Error(ErrorKind::invalid_argument, "vector family needs n >= 1");
    n_ = vectors.size();
    data_.reserve(n_ * space_.dim());
    for (std::size_t i = 0; i < n_; ++i) {
      if (vectors[i].size() != space_.dim()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "v_" + std::to_string(i + 1) + " has " + std::to_string(vectors[i].size()) +
                        " coordinates, space has dim " + std::to_string(space_.dim()),
                    i + 1);
      }
      require_finite(vectors[i], ("v_" + std::to_string(i + 1)).c_str());
      data_.insert(data_.end(), vectors[i].begin(), vectors[i].end());
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const double nv = space_(vector(i));
      if (!(nv > kZeroVectorTolerance)) {
        throw Error(ErrorKind::zero_vector, "v_" + std::to_string(i + 1) + " has norm " + std::to_string(nv), i + 1);
      }
    }
  }

  const NormSpec& space() const noexcept { return space_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return space_.dim(); }
  std::span<const double> vector(std::size_t i) const { return {data_.data() + i * m(), m()}; }
  /// Column-major m x n coordinates.
  std::span<const double> data() const noexcept { return data_; }

  std::vector<std::vector<double>> vectors() const {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < n_; ++i) out.emplace_back(vector(i).begin(), vector(i).end());
    return out;
  }

  /// The same family with every v_i replaced by t * v_i.
  VectorFamily scaled(double t) const {
    auto vs = vectors();
    for (auto& v : vs) {
      for (auto& c : v) c *= t;
    }
    return VectorFamily(space_, vs);
  }

 private:
  NormSpec space_;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Rebuilds the family, reporting the first offending index on failure.
inline VectorFamily validate_family(const NormSpec& space, const std::vector<std::vector<double>>& vectors) {
  return VectorFamily(space, vectors);
}

/// n Gaussian vectors in E; redrawn on the (measure-zero) event of a zero vector.
template <class Generator>
VectorFamily random_family(const NormSpec& space, std::size_t n, Generator& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> vs(n, std::vector<double>(space.dim()));
  for (auto& v : vs) {
    do {
      for (auto& c : v) c = normal(rng);
    } while (!(space(v) > kZeroVectorTolerance));
  }
  return VectorFamily(space, vs);
}

}  // namespace normlab
