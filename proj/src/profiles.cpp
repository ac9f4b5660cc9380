#include "bcpp/profiles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bcpp/errors.hpp"

namespace bcpp {

namespace {

double distance(std::span<const double> u, const std::vector<double>& center) {
  double s = 0.0;
  for (std::size_t i = 0; i < center.size(); ++i) {
    const double d = u[i] - center[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double linf_distance(std::span<const double> u, const std::vector<double>& center) {
  double m = 0.0;
  for (std::size_t i = 0; i < center.size(); ++i) m = std::max(m, std::abs(u[i] - center[i]));
  return m;
}

double center_linf(const std::vector<double>& center) {
  double m = 0.0;
  for (double c : center) m = std::max(m, std::abs(c));
  return m;
}

// Radial profile f(r) with first and second derivative.
struct Radial {
  double f, df, d2f;
};

double radial_laplacian(const Radial& g, double r, int dim) {
  if (r == 0.0) return dim * g.d2f;
  return g.d2f + (dim - 1) * g.df / r;
}

Radial cosine_bump_radial(double r, double a) {
  if (r >= a) return {0.0, 0.0, 0.0};
  const double w = std::numbers::pi / a;
  const double c = 0.5 * (1.0 + std::cos(w * r));
  const double dc = -0.5 * w * std::sin(w * r);
  const double d2c = -0.5 * w * w * std::cos(w * r);
  return {c * c, 2.0 * c * dc, 2.0 * dc * dc + 2.0 * c * d2c};
}

Radial polynomial_bump_radial(double r, double a, double b) {
  const double inv_a2 = 1.0 / (a * a);
  if (r <= b) return {1.0 - 0.5 * r * r * inv_a2, -r * inv_a2, -inv_a2};
  if (r >= a) return {0.0, 0.0, 0.0};
  // q(s) = (1-s)^3 (A + B s + C s^2) matches value, slope and curvature of the
  // core at s = 0 and vanishes to second order at s = 1.
  const double span = a - b;
  const double v0 = 1.0 - 0.5 * b * b * inv_a2;
  const double w1 = -b * inv_a2 * span;
  const double w2 = -inv_a2 * span * span;
  const double A = v0;
  const double B = w1 + 3.0 * A;
  const double C = 0.5 * w2 + 3.0 * B - 3.0 * A;
  const double s = (r - b) / span;
  const double m = 1.0 - s;
  const double p = A + s * (B + s * C);
  const double dp = B + 2.0 * C * s;
  const double d2p = 2.0 * C;
  const double q = m * m * m * p;
  const double dq = -3.0 * m * m * p + m * m * m * dp;
  const double d2q = 6.0 * m * p - 6.0 * m * m * dp + m * m * m * d2p;
  return {q, dq / span, d2q / (span * span)};
}

}  // namespace

double DensityProfile::operator()(std::span<const double> u) const {
  switch (kind) {
    case ProfileKind::constant_bump:
      return linf_distance(u, center) <= radius ? height : 0.0;
    case ProfileKind::gaussian_bump: {
      const double r = distance(u, center);
      return height * std::exp(-0.5 * r * r / (width * width));
    }
    case ProfileKind::smooth_box: {
      const double r = distance(u, center);
      if (r <= radius) return height;
      if (r >= radius + width) return 0.0;
      const double s = (r - radius) / width;
      return height * (1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s)));
    }
  }
  return 0.0;
}

double DensityProfile::support_halfwidth() const {
  switch (kind) {
    case ProfileKind::constant_bump: return center_linf(center) + radius;
    case ProfileKind::gaussian_bump: return center_linf(center) + 8.0 * width;
    case ProfileKind::smooth_box: return center_linf(center) + radius + width;
  }
  return 0.0;
}

void DensityProfile::validate() const {
  if (center.empty()) throw ConfigError("profile center must have d components", {}, "profile.center");
  if (!(height >= 0.0) || !std::isfinite(height)) {
    throw ConfigError("profile height must be finite and >= 0", {}, "profile.height");
  }
  if (kind != ProfileKind::gaussian_bump && !(radius > 0.0)) {
    throw ConfigError("profile radius must be > 0", {}, "profile.radius");
  }
  if (kind != ProfileKind::constant_bump && !(width > 0.0)) {
    throw ConfigError("profile width must be > 0", {}, "profile.width");
  }
}

double TestFunction::operator()(std::span<const double> u) const {
  const double r = distance(u, center);
  return kind == TestFunctionKind::cosine_bump ? cosine_bump_radial(r, radius).f
                                               : polynomial_bump_radial(r, radius, inner_radius).f;
}

double TestFunction::laplacian(std::span<const double> u) const {
  const double r = distance(u, center);
  const Radial g = kind == TestFunctionKind::cosine_bump ? cosine_bump_radial(r, radius)
                                                         : polynomial_bump_radial(r, radius, inner_radius);
  return radial_laplacian(g, r, dim());
}

double TestFunction::support_halfwidth() const { return center_linf(center) + radius; }

void TestFunction::validate() const {
  if (center.empty()) throw ConfigError("test function center must have d components", {}, "test_fn.center");
  if (!(radius > 0.0)) throw ConfigError("test function radius must be > 0", {}, "test_fn.radius");
  if (kind == TestFunctionKind::polynomial_bump && !(inner_radius > 0.0 && inner_radius < radius)) {
    throw ConfigError("polynomial_bump needs 0 < inner_radius < radius", {}, "test_fn.inner_radius");
  }
}

ProfileKind parse_profile_kind(std::string_view name) {
  if (name == "constant_bump") return ProfileKind::constant_bump;
  if (name == "gaussian_bump") return ProfileKind::gaussian_bump;
  if (name == "smooth_box") return ProfileKind::smooth_box;
  throw ConfigError("unknown profile kind '" + std::string(name) +
                    "' (expected constant_bump, gaussian_bump or smooth_box)");
}

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant_bump: return "constant_bump";
    case ProfileKind::gaussian_bump: return "gaussian_bump";
    case ProfileKind::smooth_box: return "smooth_box";
  }
  return "?";
}

TestFunctionKind parse_test_function_kind(std::string_view name) {
  if (name == "cosine_bump") return TestFunctionKind::cosine_bump;
  if (name == "polynomial_bump") return TestFunctionKind::polynomial_bump;
  throw ConfigError("unknown test function kind '" + std::string(name) +
                    "' (expected cosine_bump or polynomial_bump)");
}

std::string_view to_string(TestFunctionKind kind) {
  return kind == TestFunctionKind::cosine_bump ? "cosine_bump" : "polynomial_bump";
}

}  // namespace bcpp
