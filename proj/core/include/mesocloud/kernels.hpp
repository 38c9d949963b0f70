#pragma once

#include <variant>

#include "mesocloud/geometry.hpp"
#include "mesocloud/types.hpp"

namespace mesocloud {

/// Uniform body force of the given amplitude supported in the ball |x| < rho.
struct SourceSpec {
  double rho = 1.0;
  double amplitude = 6.0;
};

/// Test background v(x) = g . x with zero body force (free space only).
struct UniformGradient {
  Vec3 g = Vec3::UnitX();
};

using Background = std::variant<SourceSpec, UniformGradient>;

/// Symmetric negative definite 3x3 matrix describing a void's far-field
/// dipole response.
class PolarizationMatrix {
 public:
  /// Throws InvalidArgument unless m is symmetric and negative definite.
  explicit PolarizationMatrix(const Mat3& m);

  const Mat3& matrix() const noexcept { return matrix_; }
  /// Largest and smallest eigenvalues of -Q.
  double lambda_max() const noexcept { return lambda_max_; }
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  Mat3 matrix_;
  double lambda_max_;
  double lambda_min_;
};

/// -2 pi r^3 I, the polarization matrix of a sphere.
PolarizationMatrix polarization_sphere(double radius);

// Unperturbed solution. Throws OutsideDomain for points beyond a ball domain.
double v_eval(const Vec3& x, const SourceSpec& source, const DomainSpec& domain);
Vec3 grad_v(const Vec3& x, const SourceSpec& source, const DomainSpec& domain);
double v_eval(const Vec3& x, const Background& bg, const DomainSpec& domain);
Vec3 grad_v(const Vec3& x, const Background& bg, const DomainSpec& domain);

/// Green's function of -Laplace with zero Dirichlet data on the ball surface
/// (or decay at infinity in free space).
double green(const Vec3& x, const Vec3& y, const DomainSpec& domain);
/// Gradient of green in its first argument.
Vec3 grad_x_green(const Vec3& x, const Vec3& y, const DomainSpec& domain);

// Regular part H = 1/(4 pi |x-y|) - G of the ball Green's function. The
// symmetric form R / (4 pi sqrt(|x|^2 |y|^2 - 2 R^2 x.y + R^4)) is used, which
// stays regular at y = 0.
double regular_part(const Vec3& x, const Vec3& y, double R);
Vec3 grad_x_H(const Vec3& x, const Vec3& y, double R);
Vec3 grad_y_H(const Vec3& x, const Vec3& y, double R);
/// Mixed Hessian M(a, b) = d^2 H / dx_a dy_b.
Mat3 hess_xy_H(const Vec3& x, const Vec3& y, double R);

/// Mixed Hessian of the free-space kernel: (I - 3 r r^T / |r|^2) / (4 pi |r|^3), r = x - y.
Mat3 kernel_T(const Vec3& x, const Vec3& y);
/// Mixed Hessian (grad_x outer grad_y) of the domain Green's function.
Mat3 kernel_frakT(const Vec3& x, const Vec3& y, const DomainSpec& domain);

/// The three dipole fields of a spherical void, -(r^3/2) (x - O) / |x - O|^3.
/// Throws InsideVoid if x lies strictly inside the void.
Vec3 dipole_field_sphere(const Vec3& x, const Void& v);
/// J(i, a) = d D_i / d x_a.
Mat3 dipole_field_jacobian(const Vec3& x, const Void& v);

}  // namespace mesocloud
