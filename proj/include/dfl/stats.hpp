#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace dfl {

/// Estimate with its standard error. A NaN stderr marks an undefined
/// sample variance (fewer than two samples).
struct Estimate {
  double value = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();

  bool has_stderr() const { return std::isfinite(error); }
};

/// Welford running mean/variance.
class RunningStats {
public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : std::numeric_limits<double>::quiet_NaN();
  }
  double stderr_of_mean() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_))
                  : std::numeric_limits<double>::quiet_NaN();
  }
  Estimate estimate() const { return {mean(), stderr_of_mean()}; }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline Estimate mean_estimate(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return s.estimate();
}

/// Batch-means estimate of a correlated time series. Uses `n_batches`
/// contiguous batches; trailing samples that do not fill a batch are dropped.
inline Estimate batch_means(std::span<const double> series, std::size_t n_batches = 20) {
  if (series.empty()) return {};
  if (series.size() < 2 * n_batches) n_batches = series.size() / 2;
  if (n_batches < 2) return {mean_estimate(series).value, std::numeric_limits<double>::quiet_NaN()};
  const std::size_t len = series.size() / n_batches;
  RunningStats s;
  for (std::size_t b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) acc += series[b * len + k];
    s.add(acc / static_cast<double>(len));
  }
  // full-series mean, batch-level error
  double total = 0.0;
  for (double x : series) total += x;
  return {total / static_cast<double>(series.size()), s.stderr_of_mean()};
}

/// Trapezoidal rule on a strictly increasing grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) acc += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  return acc;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

inline double combined_stderr(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace dfl
