#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace normlab {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr() const noexcept { return q3 - q1; }
};

inline Quartiles quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y ~ intercept + slope * x. Needs two distinct x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit fit;
  fit.points = x.size();
  if (x.size() < 2) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  fit.intercept = my - fit.slope * mx;
  return fit;
}

/// True when `medians` is non-decreasing up to one interquartile range:
/// medians[k+1] >= medians[k] - max(iqr[k], iqr[k+1]).
inline bool monotone_within_iqr(std::span<const Quartiles> rows, bool increasing) {
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double slack = std::max(rows[k].iqr(), rows[k + 1].iqr());
    const double step = rows[k + 1].median - rows[k].median;
    if (increasing ? step < -slack : step > slack) return false;
  }
  return true;
}

}  // namespace normlab
