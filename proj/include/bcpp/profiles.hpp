#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcpp {

enum class ProfileKind { constant_bump, gaussian_bump, smooth_box };

// Macroscopic initial density rho_0 : R^d -> [0, inf).
//
//   constant_bump  height on the box |u - center|_inf <= radius, 0 outside
//   gaussian_bump  height * exp(-|u - center|^2 / (2 width^2))
//   smooth_box     height for |u - center| <= radius, C^2 quintic fall-off to
//                  0 at radius + width
struct DensityProfile {
  ProfileKind kind = ProfileKind::gaussian_bump;
  std::vector<double> center;  // size d
  double radius = 0.5;
  double width = 0.25;
  double height = 1.0;

  int dim() const { return static_cast<int>(center.size()); }
  double operator()(std::span<const double> u) const;
  double sup_norm() const { return height; }

  // Half-width of an l-infinity box around the origin containing the
  // support. Gaussians use 8 standard deviations (relative tail < 1.3e-14).
  double support_halfwidth() const;

  // Throws ConfigError on non-positive sizes or negative height.
  void validate() const;
};

enum class TestFunctionKind { cosine_bump, polynomial_bump };

// Compactly supported radial test function with an analytic Laplacian.
//
//   cosine_bump      ((1 + cos(pi r / a)) / 2)^2 for r < a; C^3 at r = a
//   polynomial_bump  1 - r^2 / (2 a^2) for r <= b (exactly quadratic core),
//                    quintic Hermite blend to 0 at r = a; C^2
//
// with r = |u - center|, a = radius, b = inner_radius.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::cosine_bump;
  std::vector<double> center;
  double radius = 0.5;
  double inner_radius = 0.25;

  int dim() const { return static_cast<int>(center.size()); }
  double operator()(std::span<const double> u) const;
  double laplacian(std::span<const double> u) const;
  double sup_norm() const { return 1.0; }
  double support_halfwidth() const;
  void validate() const;
};

ProfileKind parse_profile_kind(std::string_view name);
std::string_view to_string(ProfileKind kind);
TestFunctionKind parse_test_function_kind(std::string_view name);
std::string_view to_string(TestFunctionKind kind);

}  // namespace bcpp
