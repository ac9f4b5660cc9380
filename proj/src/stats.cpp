#include "bcpp/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "bcpp/errors.hpp"

namespace bcpp {

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const { return n_ < 2 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n_ - 1)); }

double RunningStats::standard_error() const {
  return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

TwoPass two_pass(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (double v : values) s += v;
  const double mean = s / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, values.size() < 2 ? 0.0 : ss / static_cast<double>(values.size() - 1)};
}

Interval variance_interval(double sample_variance, std::uint64_t n, double confidence) {
  if (n < 2) throw ConfigError("a variance interval needs at least 2 replicas", {}, "replicas");
  const auto dof = static_cast<double>(n - 1);
  const boost::math::chi_squared dist(dof);
  const double alpha = 1.0 - confidence;
  const double hi_q = boost::math::quantile(dist, 1.0 - 0.5 * alpha);
  const double lo_q = boost::math::quantile(dist, 0.5 * alpha);
  return {dof * sample_variance / hi_q, dof * sample_variance / lo_q};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("line fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("line fit needs two distinct abscissae");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly).slope;
}

}  // namespace bcpp
