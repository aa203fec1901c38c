#pragma once

// Random sign matrices eps_{ij} and exhaustive Gray-code enumeration of sign
// vectors.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "normlab/error.hpp"
#include "normlab/rng.hpp"

namespace normlab {

inline constexpr std::size_t kDefaultEnumCap = 24;
inline constexpr std::uint64_t kDefaultSignBitCap = std::uint64_t{1} << 33;  // 1 GiB of packed signs

/// n signs, bit i set <=> entry i is +1.
class SignVector {
 public:
  SignVector() = default;
  SignVector(std::size_t n, std::uint64_t plus_mask) : n_(n), bits_(plus_mask) {}

  std::size_t size() const noexcept { return n_; }
  int operator[](std::size_t i) const noexcept { return (bits_ >> i) & 1u ? 1 : -1; }
  std::uint64_t bits() const noexcept { return bits_; }

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  std::size_t n_ = 0;
  std::uint64_t bits_ = 0;
};

/// Yields all 2^n sign vectors in reflected Gray-code order, starting from
/// all -1. Each step after the first reports the single flipped coordinate.
class GrayCodeSigns {
 public:
  explicit GrayCodeSigns(std::size_t n, std::size_t cap = kDefaultEnumCap) : n_(n) {
    if (n == 0) throw Error(ErrorKind::invalid_argument, "sign enumeration needs n >= 1");
    if (n > cap || n > 63) {
      throw Error(ErrorKind::capacity, "enumerating 2^" + std::to_string(n) + " sign vectors exceeds the cap n <= " +
                                           std::to_string(std::min<std::size_t>(cap, 63)));
    }
  }

  std::uint64_t size() const noexcept { return std::uint64_t{1} << n_; }

  /// Advances; returns false once all vectors were produced.
  bool next(SignVector& out, std::optional<std::size_t>& flipped) {
    if (step_ == size()) return false;
    if (step_ == 0) {
      flipped.reset();
    } else {
      const auto bit = static_cast<std::size_t>(std::countr_zero(step_));
      bits_ ^= std::uint64_t{1} << bit;
      flipped = bit;
    }
    ++step_;
    out = SignVector(n_, bits_);
    return true;
  }

 private:
  std::size_t n_;
  std::uint64_t step_ = 0;
  std::uint64_t bits_ = 0;
};

inline GrayCodeSigns enumerate_signs(std::size_t n, std::size_t cap = kDefaultEnumCap) {
  return GrayCodeSigns(n, cap);
}

struct SeedRecord {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;
  friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

/// n x N matrix of +/-1, packed column by column (bit set <=> +1).
class SignMatrix {
 public:
  SignMatrix(std::size_t n, std::size_t N) : n_(n), cols_(N), words_((n + 63) / 64) {
    if (n == 0 || N == 0) throw Error(ErrorKind::invalid_argument, "sign matrix needs n >= 1 and N >= 1");
    bits_.assign(words_ * N, 0);
  }

  /// Matrix whose j-th column is `columns[j]` (entries must be +/-1).
  static SignMatrix from_columns(const std::vector<std::vector<int>>& columns) {
    if (columns.empty()) throw Error(ErrorKind::invalid_argument, "sign matrix needs N >= 1");
    SignMatrix out(columns.front().size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != out.n_) throw Error(ErrorKind::dimension_mismatch, "ragged sign columns", j + 1);
      for (std::size_t i = 0; i < out.n_; ++i) out.set(i, j, columns[j][i]);
    }
    return out;
  }

  static SignMatrix constant(std::size_t n, std::size_t N, int sign) {
    SignMatrix out(n, N);
    if (sign == 1) {
      for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t i = 0; i < n; ++i) out.set(i, j, 1);
      }
    } else if (sign != -1) {
      throw Error(ErrorKind::invalid_argument, "sign must be +1 or -1");
    }
    return out;
  }

  /// N = 2^n columns listing every sign vector once (Gray-code order).
  static SignMatrix full_enumeration(std::size_t n, std::size_t cap = kDefaultEnumCap) {
    auto gray = enumerate_signs(n, cap);
    SignMatrix out(n, static_cast<std::size_t>(gray.size()));
    SignVector v;
    std::optional<std::size_t> flipped;
    for (std::size_t j = 0; gray.next(v, flipped); ++j) {
      for (std::size_t i = 0; i < n; ++i) out.set(i, j, v[i]);
    }
    return out;
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return cols_; }
  /// xi = N/n - 1.
  double xi() const noexcept { return static_cast<double>(cols_) / static_cast<double>(n_) - 1.0; }

  int operator()(std::size_t i, std::size_t j) const noexcept {
    return (bits_[j * words_ + i / 64] >> (i % 64)) & 1u ? 1 : -1;
  }

  void set(std::size_t i, std::size_t j, int sign) {
    if (sign != 1 && sign != -1) throw Error(ErrorKind::invalid_argument, "sign entries must be +1 or -1");
    auto& word = bits_[j * words_ + i / 64];
    const std::uint64_t bit = std::uint64_t{1} << (i % 64);
    word = sign == 1 ? (word | bit) : (word & ~bit);
  }

  const std::optional<SeedRecord>& seed_record() const noexcept { return seed_; }
  void set_seed_record(SeedRecord r) { seed_ = r; }

  friend bool operator==(const SignMatrix& a, const SignMatrix& b) {
    return a.n_ == b.n_ && a.cols_ == b.cols_ && a.bits_ == b.bits_;
  }

  std::vector<double> column_as_doubles(std::size_t j) const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)(i, j);
    return out;
  }

 private:
  std::size_t n_;
  std::size_t cols_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
  std::optional<SeedRecord> seed_;

  friend SignMatrix sample_sign_matrix_impl(std::size_t n, std::size_t N, std::uint64_t seed);
};

/// I.i.d. uniform signs. Column j takes ceil(n/64) consecutive outputs of
/// std::mt19937_64 seeded with `seed`; bit i of the stream word is entry i.
inline SignMatrix sample_sign_matrix_impl(std::size_t n, std::size_t N, std::uint64_t seed) {
  SignMatrix out(n, N);
  Rng rng(seed);
  const std::size_t tail = n % 64;
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t w = 0; w < out.words_; ++w) {
      std::uint64_t word = rng();
      if (w + 1 == out.words_ && tail != 0) word &= (std::uint64_t{1} << tail) - 1;
      out.bits_[j * out.words_ + w] = word;
    }
  }
  return out;
}

inline SignMatrix sample_sign_matrix(std::size_t n, std::size_t N, std::uint64_t seed,
                                     std::uint64_t max_bits = kDefaultSignBitCap,
                                     std::optional<SeedRecord> record = std::nullopt) {
  if (n == 0 || N == 0) throw Error(ErrorKind::invalid_argument, "sign matrix needs n >= 1 and N >= 1");
  if (static_cast<double>(n) * static_cast<double>(N) > static_cast<double>(max_bits)) {
    throw Error(ErrorKind::capacity, std::to_string(n) + " x " + std::to_string(N) + " signs exceed the memory cap");
  }
  auto out = sample_sign_matrix_impl(n, N, seed);
  out.set_seed_record(record.value_or(SeedRecord{seed, 0}));
  return out;
}

/// Text dump: "n N" on the first line, then one line per column with its
/// n entries as +1/-1.
inline void write_sign_matrix(std::ostream& os, const SignMatrix& a) {
  os << a.rows() << ' ' << a.cols() << '\n';
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i) os << ' ';
      os << (a(i, j) > 0 ? "+1" : "-1");
    }
    os << '\n';
  }
}

inline SignMatrix read_sign_matrix(std::istream& is) {
  std::size_t n = 0, N = 0;
  if (!(is >> n >> N) || n == 0 || N == 0) throw Error(ErrorKind::invalid_argument, "sign matrix header must be \"n N\"");
  SignMatrix out(n, N);
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      int v = 0;
      if (!(is >> v) || (v != 1 && v != -1)) {
        throw Error(ErrorKind::invalid_argument, "bad sign entry in column " + std::to_string(j + 1), j + 1);
      }
      out.set(i, j, v);
    }
  }
  return out;
}

}  // namespace normlab
