#include "mesocloud/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mesocloud/error.hpp"

namespace mesocloud {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

void check_distinct(const Vec3& x, const Vec3& y, double r) {
  const double scale = std::max(x.norm(), y.norm());
  if (r == 0.0 || r <= kCoincidenceTol * scale) {
    throw Error(ErrorCode::CoincidentPoints, "kernel evaluated at coincident points");
  }
}

void check_in_ball(const Vec3& x, const DomainSpec& domain) {
  if (domain.is_ball() && x.norm() > domain.radius() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "point at |x| = " << x.norm() << " lies outside the ball of radius " << domain.radius();
    throw Error(ErrorCode::OutsideDomain, os.str());
  }
}

void check_source(const SourceSpec& s, const DomainSpec& domain) {
  if (!(s.rho > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "source radius must be positive");
  }
  if (domain.is_ball() && !(s.rho < domain.radius())) {
    throw Error(ErrorCode::InvalidArgument, "source radius must be smaller than the ball radius");
  }
}

double phi(const Vec3& x, const Vec3& y, double R) {
  const double R2 = R * R;
  return x.squaredNorm() * y.squaredNorm() - 2.0 * R2 * x.dot(y) + R2 * R2;
}

}  // namespace

PolarizationMatrix::PolarizationMatrix(const Mat3& m) : matrix_(m) {
  if (!m.allFinite() || !m.isApprox(m.transpose(), 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "polarization matrix must be symmetric");
  }
  if (m == m(0, 0) * Mat3::Identity()) {
    // Exact eigenvalues for isotropic (sphere) matrices.
    lambda_min_ = lambda_max_ = -m(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat3> es(-m, Eigen::EigenvaluesOnly);
    lambda_min_ = es.eigenvalues()(0);
    lambda_max_ = es.eigenvalues()(2);
  }
  if (!(lambda_min_ > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "polarization matrix must be negative definite");
  }
}

PolarizationMatrix polarization_sphere(double radius) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
  }
  return PolarizationMatrix(-2.0 * std::numbers::pi * radius * radius * radius * Mat3::Identity());
}

double v_eval(const Vec3& x, const SourceSpec& source, const DomainSpec& domain) {
  check_source(source, domain);
  check_in_ball(x, domain);
  const double rho = source.rho;
  const double k = source.amplitude / 6.0;
  const double r = x.norm();
  const double inv_R = domain.is_ball() ? 1.0 / domain.radius() : 0.0;
  if (r < rho) {
    return k * (rho * rho * (3.0 - 2.0 * rho * inv_R) - r * r);
  }
  return k * 2.0 * rho * rho * rho * (1.0 / r - inv_R);
}

Vec3 grad_v(const Vec3& x, const SourceSpec& source, const DomainSpec& domain) {
  check_source(source, domain);
  check_in_ball(x, domain);
  const double rho = source.rho;
  const double k = source.amplitude / 6.0;
  const double r = x.norm();
  if (r < rho) {
    return -2.0 * k * x;
  }
  return -2.0 * k * rho * rho * rho / (r * r * r) * x;
}

double v_eval(const Vec3& x, const Background& bg, const DomainSpec& domain) {
  if (const auto* s = std::get_if<SourceSpec>(&bg)) {
    return v_eval(x, *s, domain);
  }
  if (domain.is_ball()) {
    throw Error(ErrorCode::InvalidArgument, "uniform-gradient background is only defined in free space");
  }
  return std::get<UniformGradient>(bg).g.dot(x);
}

Vec3 grad_v(const Vec3& x, const Background& bg, const DomainSpec& domain) {
  if (const auto* s = std::get_if<SourceSpec>(&bg)) {
    return grad_v(x, *s, domain);
  }
  if (domain.is_ball()) {
    throw Error(ErrorCode::InvalidArgument, "uniform-gradient background is only defined in free space");
  }
  return std::get<UniformGradient>(bg).g;
}

double regular_part(const Vec3& x, const Vec3& y, double R) {
  return R / (kFourPi * std::sqrt(phi(x, y, R)));
}

Vec3 grad_x_H(const Vec3& x, const Vec3& y, double R) {
  const double p = phi(x, y, R);
  const Vec3 u = y.squaredNorm() * x - R * R * y;
  return -R / (kFourPi * p * std::sqrt(p)) * u;
}

Vec3 grad_y_H(const Vec3& x, const Vec3& y, double R) {
  return grad_x_H(y, x, R);
}

Mat3 hess_xy_H(const Vec3& x, const Vec3& y, double R) {
  const double R2 = R * R;
  const double p = phi(x, y, R);
  const Vec3 u = y.squaredNorm() * x - R2 * y;  // half of grad_x phi
  const Vec3 w = x.squaredNorm() * y - R2 * x;  // half of grad_y phi
  const Mat3 inner = p * (2.0 * x * y.transpose() - R2 * Mat3::Identity()) - 3.0 * u * w.transpose();
  return -R / (kFourPi * p * p * std::sqrt(p)) * inner;
}

double green(const Vec3& x, const Vec3& y, const DomainSpec& domain) {
  const double r = (x - y).norm();
  check_distinct(x, y, r);
  check_in_ball(x, domain);
  check_in_ball(y, domain);
  const double g = 1.0 / (kFourPi * r);
  return domain.is_ball() ? g - regular_part(x, y, domain.radius()) : g;
}

Vec3 grad_x_green(const Vec3& x, const Vec3& y, const DomainSpec& domain) {
  const Vec3 d = x - y;
  const double r = d.norm();
  check_distinct(x, y, r);
  const Vec3 g = -d / (kFourPi * r * r * r);
  return domain.is_ball() ? Vec3(g - grad_x_H(x, y, domain.radius())) : g;
}

Mat3 kernel_T(const Vec3& x, const Vec3& y) {
  const Vec3 d = x - y;
  const double r = d.norm();
  check_distinct(x, y, r);
  const double r2 = r * r;
  return (Mat3::Identity() - 3.0 * d * d.transpose() / r2) / (kFourPi * r2 * r);
}

Mat3 kernel_frakT(const Vec3& x, const Vec3& y, const DomainSpec& domain) {
  Mat3 t = kernel_T(x, y);
  if (domain.is_ball()) {
    check_in_ball(x, domain);
    check_in_ball(y, domain);
    t -= hess_xy_H(x, y, domain.radius());
  }
  return t;
}

Vec3 dipole_field_sphere(const Vec3& x, const Void& v) {
  const Vec3 d = x - v.center();
  const double r = d.norm();
  if (r < v.radius() * (1.0 - kSurfaceTol)) {
    throw Error(ErrorCode::InsideVoid, "dipole field evaluated inside its void");
  }
  const double a = v.radius();
  return -(a * a * a / 2.0) / (r * r * r) * d;
}

Mat3 dipole_field_jacobian(const Vec3& x, const Void& v) {
  const Vec3 d = x - v.center();
  const double r = d.norm();
  if (r < v.radius() * (1.0 - kSurfaceTol)) {
    throw Error(ErrorCode::InsideVoid, "dipole field evaluated inside its void");
  }
  const double a = v.radius();
  const double r2 = r * r;
  return -(a * a * a / 2.0) / (r2 * r) * (Mat3::Identity() - 3.0 * d * d.transpose() / r2);
}

}  // namespace mesocloud
