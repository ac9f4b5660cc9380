#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bcpp {

// Welford accumulator; add values in a fixed order for reproducible sums.
class RunningStats {
 public:
  void add(double x);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance; 0 for fewer than two values.
  double variance() const;
  double standard_error() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct TwoPass {
  double mean;
  double variance;
};

TwoPass two_pass(std::span<const double> values);

struct Interval {
  double lower;
  double upper;
};

// Two-sided chi-square interval for a normal-population variance from n
// samples. Throws ConfigError for n < 2.
Interval variance_interval(double sample_variance, std::uint64_t n, double confidence = 0.95);

struct LineFit {
  double intercept;
  double slope;
};

// Least squares y = intercept + slope * x. Throws ConfigError for fewer than
// two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace bcpp
