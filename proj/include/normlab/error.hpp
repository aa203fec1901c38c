#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace normlab {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  capacity,
  zero_vector,
  covering_violation,
  config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::zero_vector: return "zero_vector";
    case ErrorKind::covering_violation: return "covering_violation";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

// Every module reports failures through this type. `index` carries the
// offending position (1-based vector index, trial index, ...) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what), index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::optional<std::size_t> index_;
};

// Raised by net decomposition when a residual direction is farther than 1/2
// from every net point. The witness is a unit vector that can be fed back to
// the net as a new point.
class CoveringViolation : public Error {
 public:
  CoveringViolation(std::vector<double> witness, double distance)
      : Error(ErrorKind::covering_violation,
              "nearest net point at distance " + std::to_string(distance) + " > 1/2"),
        witness_(std::move(witness)),
        distance_(distance) {}

  const std::vector<double>& witness() const noexcept { return witness_; }
  double distance() const noexcept { return distance_; }

 private:
  std::vector<double> witness_;
  double distance_;
};

}  // namespace normlab
