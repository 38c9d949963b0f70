#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mesocloud/error.hpp"
#include "mesocloud/geometry.hpp"
#include "mesocloud/kernels.hpp"
#include "reference.hpp"

namespace mesocloud {
namespace {

using testing::fd_gradient;
using testing::fd_jacobian;
using testing::fd_laplacian;
using testing::fd_mixed_hessian;
using testing::random_in_ball;

constexpr double kPi = std::numbers::pi;

double rel_err(const Mat3& a, const Mat3& b) { return (a - b).norm() / b.norm(); }
double rel_err(const Vec3& a, const Vec3& b) { return (a - b).norm() / b.norm(); }

/// Random pair strictly inside the ball of radius R, separated by at least 0.1 R.
std::pair<Vec3, Vec3> random_pair(std::mt19937_64& rng, double R) {
  for (;;) {
    const Vec3 x = random_in_ball(rng, 0.85 * R);
    const Vec3 y = random_in_ball(rng, 0.85 * R);
    if ((x - y).norm() > 0.1 * R && y.norm() > 0.05 * R) {
      return {x, y};
    }
  }
}

// ---------------------------------------------------------------- v

TEST(UnperturbedSolution, VanishesOnBallSurface) {
  const SourceSpec src{30.0, 6.0};
  const DomainSpec ball = DomainSpec::ball(120.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(v_eval(120.0 * testing::random_unit(rng), src, ball), 0.0, 1e-12);
  }
}

TEST(UnperturbedSolution, ContinuousAtSourceRadius) {
  const double rho = 2.0, R = 7.0;
  const SourceSpec src{rho, 6.0};
  const DomainSpec ball = DomainSpec::ball(R);
  const double expected = 2 * rho * rho - 2 * rho * rho * rho / R;
  EXPECT_NEAR(v_eval(Vec3(rho * (1 - 1e-13), 0, 0), src, ball), expected, 1e-11);
  EXPECT_NEAR(v_eval(Vec3(rho * (1 + 1e-13), 0, 0), src, ball), expected, 1e-11);
}

TEST(UnperturbedSolution, ValueAtSixtyMatchesRadialOde) {
  const SourceSpec src{30.0, 6.0};
  const Vec3 x(60, 0, 0);
  EXPECT_NEAR(v_eval(x, src, DomainSpec::ball(120.0)), 450.0, 1e-10);
  // Independent check: integrate -(r^2 u')'/r^2 = f with u(120) = 0.
  const double ode = testing::radial_poisson([](double r) { return r <= 30.0 ? 6.0 : 0.0; }, 120.0, 60.0, 4000);
  EXPECT_NEAR(ode, 450.0, 450.0 * 1e-6);
  // And inside the source ball.
  const double inner = testing::radial_poisson([](double r) { return r <= 30.0 ? 6.0 : 0.0; }, 120.0, 15.0, 4000);
  EXPECT_NEAR(v_eval(Vec3(0, 15, 0), src, DomainSpec::ball(120.0)), inner, std::abs(inner) * 1e-6);
}

TEST(UnperturbedSolution, FreeSpaceNewtonianPotential) {
  const SourceSpec src{1.5, 4.0};
  const DomainSpec fs = DomainSpec::free_space();
  const double rho = 1.5, A = 4.0;
  EXPECT_NEAR(v_eval(Vec3(0.5, 0, 0), src, fs), A * (rho * rho / 2 - 0.25 / 6), 1e-14);
  EXPECT_NEAR(v_eval(Vec3(0, 3, 4), src, fs), A * rho * rho * rho / (3 * 5.0), 1e-14);
}

TEST(UnperturbedSolution, LinearInAmplitude) {
  const DomainSpec ball = DomainSpec::ball(7.0);
  const Vec3 x(0.3, 2.5, -1.0);
  EXPECT_NEAR(v_eval(x, SourceSpec{2.0, 15.0}, ball), 2.5 * v_eval(x, SourceSpec{2.0, 6.0}, ball), 1e-13);
}

TEST(UnperturbedSolution, OutsideBallThrows) {
  try {
    v_eval(Vec3(8, 0, 0), SourceSpec{2.0, 6.0}, DomainSpec::ball(7.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideDomain);
  }
}

TEST(UnperturbedGradient, KnownValueAndFiniteDifferences) {
  const SourceSpec src{2.0, 6.0};
  const DomainSpec ball = DomainSpec::ball(7.0);
  const Vec3 g = grad_v(Vec3(3, 0, 0), src, ball);
  EXPECT_NEAR(g.x(), -16.0 / 9.0, 1e-15);
  EXPECT_EQ(g.y(), 0.0);
  EXPECT_EQ(g.z(), 0.0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_in_ball(rng, 6.5);
    if (std::abs(x.norm() - 2.0) < 1e-3) continue;
    const Vec3 fd = fd_gradient([&](const Vec3& p) { return v_eval(p, src, ball); }, x, 1e-5);
    EXPECT_LT(rel_err(grad_v(x, src, ball), fd), 1e-8);
  }
  EXPECT_EQ(grad_v(Vec3::Zero(), src, ball), Vec3::Zero());
}

TEST(UnperturbedGradient, RadialOutsideSource) {
  const SourceSpec src{2.0, 6.0};
  std::mt19937_64 rng(3);
  for (const DomainSpec& dom : {DomainSpec::ball(7.0), DomainSpec::free_space()}) {
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = (2.5 + 4.0 * std::uniform_real_distribution<>(0, 1)(rng)) * testing::random_unit(rng);
      const Vec3 g = grad_v(x, src, dom);
      EXPECT_LT(g.cross(x).norm(), 1e-14 * g.norm() * x.norm());
      EXPECT_NEAR(g.norm(), 2 * 8.0 / x.squaredNorm(), 1e-13);
    }
  }
}

TEST(UniformBackground, LinearPotential) {
  const Background bg = UniformGradient{Vec3(1, -2, 0.5)};
  const Vec3 x(0.3, 0.7, -2.0);
  EXPECT_NEAR(v_eval(x, bg, DomainSpec::free_space()), 0.3 - 1.4 - 1.0, 1e-15);
  EXPECT_EQ(grad_v(x, bg, DomainSpec::free_space()), Vec3(1, -2, 0.5));
  EXPECT_THROW(v_eval(x, bg, DomainSpec::ball(5.0)), Error);
}

// ---------------------------------------------------------------- Green's function

TEST(Green, VanishesOnBallSurface) {
  const double R = 3.0;
  const DomainSpec ball = DomainSpec::ball(R);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 y = random_in_ball(rng, 0.95 * R);
    const Vec3 x = R * testing::random_unit(rng);
    const double scale = 1.0 / (4 * kPi * (x - y).norm());
    EXPECT_LE(std::abs(green(x, y, ball)), 1e-12 * scale);
  }
}

TEST(Green, Reciprocity) {
  const DomainSpec ball = DomainSpec::ball(2.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto [x, y] = random_pair(rng, 2.0);
    const double a = green(x, y, ball), b = green(y, x, ball);
    EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
  }
}

TEST(Green, MatchesExtendedPrecisionImageForm) {
  const Vec3 y(0.5, 0, 0), x(0, 0, 0.5);
  const long double ref = testing::green_image(x, y, 1.0L);
  EXPECT_NEAR(green(x, y, DomainSpec::ball(1.0)), double(ref), 1e-15 * std::abs(double(ref)));
  // Hand value: 1/(4 pi sqrt(0.5)) - 1/(4 pi * 0.5 * |x - (2, 0, 0)|) with |x - (2,0,0)| = sqrt(4.25).
  const double hand = 1.0 / (4 * kPi * std::sqrt(0.5)) - 1.0 / (4 * kPi * 0.5 * std::sqrt(4.25));
  EXPECT_NEAR(double(ref), hand, 1e-15);

  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto [p, q] = random_pair(rng, 5.0);
    const double ld = double(testing::green_image(p, q, 5.0L));
    EXPECT_NEAR(green(p, q, DomainSpec::ball(5.0)), ld, 1e-13 * std::abs(ld));
  }
}

TEST(Green, SourceAtCentreIsRegular) {
  const Vec3 x(0.3, -0.2, 0.1);
  const double R = 2.0;
  EXPECT_NEAR(green(x, Vec3::Zero(), DomainSpec::ball(R)), 1 / (4 * kPi * x.norm()) - 1 / (4 * kPi * R), 1e-15);
}

TEST(Green, CoincidentPointsThrow) {
  try {
    green(Vec3(1, 1, 1), Vec3(1, 1, 1), DomainSpec::free_space());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentPoints);
  }
}

TEST(Green, GradientMatchesFiniteDifferences) {
  const DomainSpec ball = DomainSpec::ball(2.0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, 2.0);
    const Vec3 fd = fd_gradient([&](const Vec3& p) { return green(p, y, ball); }, x, 1e-5 * 2.0);
    EXPECT_LT(rel_err(grad_x_green(x, y, ball), fd), 1e-6);
  }
}

// ---------------------------------------------------------------- regular part

TEST(RegularPart, SymmetricAndEqualToImageForm) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, 3.0);
    const double h = regular_part(x, y, 3.0);
    EXPECT_LE(std::abs(h - regular_part(y, x, 3.0)), 1e-12 * h);
    const double img =
        double(testing::image_regular_part<long double>(testing::to_long(x), testing::to_long(y), 3.0L));
    EXPECT_LE(std::abs(h - img), 1e-13 * img);
  }
}

TEST(RegularPart, GradientInYMatchesFiniteDifferences) {
  const double R = 1.7;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, R);
    const Vec3 fd = fd_gradient([&](const Vec3& q) { return regular_part(x, q, R); }, y, 1e-5 * R);
    EXPECT_LT(rel_err(grad_y_H(x, y, R), fd), 1e-6);
  }
}

TEST(RegularPart, GradientInYMatchesComplexStepOfImageForm) {
  const Vec3 x(0.3, 0, 0), y(0, 0.4, 0);
  const Vec3 ref = testing::complex_step_grad_y_H(x, y, 1.0);
  EXPECT_LT(rel_err(grad_y_H(x, y, 1.0), ref), 1e-14);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const auto [p, q] = random_pair(rng, 4.0);
    EXPECT_LT(rel_err(grad_y_H(p, q, 4.0), testing::complex_step_grad_y_H(p, q, 4.0)), 1e-12);
  }
}

TEST(RegularPart, MixedHessianMatchesFiniteDifferences) {
  const double R = 2.5;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, R);
    const Mat3 fd = fd_mixed_hessian([&](const Vec3& p, const Vec3& q) { return regular_part(p, q, R); }, x, y,
                                     1e-4 * R);
    EXPECT_LT(rel_err(hess_xy_H(x, y, R), fd), 1e-5);
    // d/dx of the complex-step y-gradient is an independent check; its
    // Jacobian is indexed (y component, x component), hence the transpose.
    const Mat3 cs = fd_jacobian([&](const Vec3& p) { return testing::complex_step_grad_y_H(p, y, R); }, x, 1e-5 * R);
    EXPECT_LT(rel_err(hess_xy_H(x, y, R), cs.transpose()), 1e-7);
  }
}

// ---------------------------------------------------------------- T and frak T

TEST(KernelT, TraceFreeSymmetricReciprocal) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto [x, y] = random_pair(rng, 10.0);
    const Mat3 T = kernel_T(x, y);
    EXPECT_LE(std::abs(T.trace()), 1e-14 * T.norm());
    EXPECT_LE((T - T.transpose()).norm(), 1e-14 * T.norm());
    EXPECT_LE((T - kernel_T(y, x)).norm(), 1e-14 * T.norm());
  }
}

TEST(KernelT, AxisAlignedSeparation) {
  const Mat3 T = kernel_T(Vec3(1.25, 0.5, -2), Vec3(0.25, 0.5, -2));
  Mat3 expected = Mat3::Zero();
  expected.diagonal() << -2, 1, 1;
  expected /= 4 * kPi;
  EXPECT_LT((T - expected).norm(), 1e-15);
}

TEST(KernelT, MatchesMixedSecondDifferencesOfNewtonKernel) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, 3.0);
    const Mat3 fd = fd_mixed_hessian(
        [](const Vec3& p, const Vec3& q) { return 1.0 / (4 * kPi * (p - q).norm()); }, x, y, 1e-4 * 3.0);
    EXPECT_LT(rel_err(kernel_T(x, y), fd), 1e-5);
  }
}

TEST(KernelT, CoincidentPointsThrow) { EXPECT_THROW(kernel_T(Vec3(1, 2, 3), Vec3(1, 2, 3)), Error); }

TEST(KernelFrakT, FreeSpaceEqualsT) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 20; ++i) {
    const auto [x, y] = random_pair(rng, 3.0);
    EXPECT_EQ(kernel_frakT(x, y, DomainSpec::free_space()), kernel_T(x, y));
  }
}

TEST(KernelFrakT, MatchesMixedSecondDifferencesOfGreen) {
  const double R = 2.0;
  const DomainSpec ball = DomainSpec::ball(R);
  std::mt19937_64 rng(15);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, R);
    const Mat3 fd =
        fd_mixed_hessian([&](const Vec3& p, const Vec3& q) { return green(p, q, ball); }, x, y, 1e-4 * R);
    EXPECT_LT(rel_err(kernel_frakT(x, y, ball), fd), 1e-5);
  }
}

TEST(KernelFrakT, Reciprocity) {
  const DomainSpec ball = DomainSpec::ball(2.0);
  std::mt19937_64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const auto [x, y] = random_pair(rng, 2.0);
    const Mat3 a = kernel_frakT(x, y, ball);
    EXPECT_LE((a - kernel_frakT(y, x, ball).transpose()).norm(), 1e-10 * a.norm());
  }
}

TEST(KernelFrakT, BallTraceIsMinusRegularHessianTrace) {
  const double R = 2.0;
  const DomainSpec ball = DomainSpec::ball(R);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const auto [x, y] = random_pair(rng, R);
    const Mat3 fd =
        fd_mixed_hessian([&](const Vec3& p, const Vec3& q) { return regular_part(p, q, R); }, x, y, 1e-4 * R);
    const double tr = kernel_frakT(x, y, ball).trace();
    EXPECT_NEAR(tr, -fd.trace(), 1e-5 * fd.norm());
  }
}

// ---------------------------------------------------------------- dipole fields

TEST(DipoleField, NeumannConditionOnSphere) {
  const Void v(Vec3(0.4, -1.0, 2.0), 0.7);
  for (const Vec3& n : fibonacci_sphere(200)) {
    const Vec3 x = v.center() + v.radius() * n;
    // Row a of the Jacobian is grad D_a; its normal derivative must equal n_a.
    const Vec3 dn = dipole_field_jacobian(x, v) * n;
    EXPECT_LE((dn - n).norm(), 1e-10);
  }
}

TEST(DipoleField, ConsistentWithPolarizationMatrix) {
  const Void v(Vec3(1, 2, 3), 0.5);
  const Mat3 Q = polarization_sphere(0.5).matrix();
  std::mt19937_64 rng(18);
  for (int i = 0; i < 20; ++i) {
    const Vec3 r = (0.6 + 2.0 * std::uniform_real_distribution<>(0, 1)(rng)) * testing::random_unit(rng);
    const Vec3 expected = Q * r / (4 * kPi * std::pow(r.norm(), 3));
    EXPECT_LE((dipole_field_sphere(v.center() + r, v) - expected).norm(), 1e-15 * expected.norm());
    EXPECT_NEAR(dipole_field_sphere(v.center() + r, v).norm(), 0.5 * 0.125 / r.squaredNorm(), 1e-15);
  }
}

TEST(DipoleField, JacobianMatchesFiniteDifferences) {
  const Void v(Vec3(0, 0, 0), 1.0);
  std::mt19937_64 rng(19);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = (1.2 + 3 * std::uniform_real_distribution<>(0, 1)(rng)) * testing::random_unit(rng);
    const Mat3 fd = fd_jacobian([&](const Vec3& p) { return dipole_field_sphere(p, v); }, x, 1e-5);
    EXPECT_LT(rel_err(dipole_field_jacobian(x, v), fd), 1e-8);
  }
}

TEST(DipoleField, InsideVoidThrows) {
  try {
    dipole_field_sphere(Vec3(0.1, 0, 0), Void(Vec3::Zero(), 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsideVoid);
  }
}

// ---------------------------------------------------------------- polarization

TEST(Polarization, SphereValues) {
  EXPECT_EQ(polarization_sphere(1.0).matrix(), -2 * kPi * Mat3::Identity());
  const double rho = 0.3, eps = 2 * rho;
  const PolarizationMatrix Q = polarization_sphere(rho);
  EXPECT_LT((Q.matrix() + kPi / 4 * eps * eps * eps * Mat3::Identity()).norm(), 1e-16);
  EXPECT_NEAR(Q.lambda_max(), 2 * kPi * rho * rho * rho, 1e-16);
  EXPECT_NEAR(Q.lambda_min(), 2 * kPi * rho * rho * rho, 1e-16);
}

TEST(Polarization, NegativeDefiniteForAllRadii) {
  for (double r : {1e-6, 1e-3, 0.5, 1.0, 40.0}) {
    const Eigen::SelfAdjointEigenSolver<Mat3> es(polarization_sphere(r).matrix());
    EXPECT_LT(es.eigenvalues().maxCoeff(), 0.0);
  }
}

TEST(Polarization, GeneralMatrixValidation) {
  Mat3 q;
  q << -3, 1, 0, 1, -2, 0, 0, 0, -1;
  const PolarizationMatrix Q(q);
  const Eigen::SelfAdjointEigenSolver<Mat3> es(-q);
  EXPECT_NEAR(Q.lambda_max(), es.eigenvalues().maxCoeff(), 1e-14);
  EXPECT_NEAR(Q.lambda_min(), es.eigenvalues().minCoeff(), 1e-14);
  Mat3 indefinite = Mat3::Identity();
  EXPECT_THROW(PolarizationMatrix{indefinite}, Error);
  Mat3 asym = -Mat3::Identity();
  asym(0, 1) = 0.5;
  EXPECT_THROW(PolarizationMatrix{asym}, Error);
}

// ---------------------------------------------------------------- properties

TEST(Harmonicity, GreenRegularPartAndDipoleFields) {
  const double R = 2.0;
  const DomainSpec ball = DomainSpec::ball(R);
  const Void v(Vec3(0.5, 0.2, -0.3), 0.2);
  std::mt19937_64 rng(20);
  const double h = 1e-4 * R;
  for (int i = 0; i < 30; ++i) {
    const auto [x, y] = random_pair(rng, R);
    const Vec3 g = grad_x_green(x, y, ball);
    // Scale the FD Laplacian by |grad| / distance, the natural second-derivative size.
    const double scale = g.norm() / (x - y).norm();
    EXPECT_LE(std::abs(fd_laplacian([&](const Vec3& p) { return green(p, y, ball); }, x, h)), 1e-4 * scale);
    const double hs = grad_x_H(x, y, R).norm() / (x - y).norm();
    EXPECT_LE(std::abs(fd_laplacian([&](const Vec3& p) { return regular_part(p, y, R); }, x, h)), 1e-4 * hs);
  }
  for (int i = 0; i < 30; ++i) {
    const Vec3 x = v.center() + (0.3 + std::uniform_real_distribution<>(0, 1)(rng)) * testing::random_unit(rng);
    const double r = (x - v.center()).norm();
    for (int a = 0; a < 3; ++a) {
      const double lap = fd_laplacian([&](const Vec3& p) { return dipole_field_sphere(p, v)[a]; }, x, 1e-4 * r);
      const double scale = dipole_field_jacobian(x, v).norm() / r;
      EXPECT_LE(std::abs(lap), 1e-4 * scale);
    }
  }
}

TEST(ScalingCovariance, PolarizationAndT) {
  const double s = 3.7;
  EXPECT_LT((polarization_sphere(s * 0.4).matrix() - s * s * s * polarization_sphere(0.4).matrix()).norm(),
            1e-13 * polarization_sphere(s * 0.4).matrix().norm());
  const Vec3 x(0.3, 0.9, -0.2), y(-0.4, 0.1, 0.6);
  EXPECT_LT((kernel_T(s * x, s * y) - kernel_T(x, y) / (s * s * s)).norm(), 1e-14 * kernel_T(x, y).norm());
}

}  // namespace
}  // namespace mesocloud
