#include "mesocloud/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mesocloud/error.hpp"

namespace mesocloud {

namespace {

void check_point(const Vec3& x, const Problem& problem) {
  if (!problem.domain.contains(x)) {
    throw Error(ErrorCode::OutsideDomain, "evaluation point outside the domain");
  }
  const auto& voids = problem.cloud.voids();
  for (std::size_t k = 0; k < voids.size(); ++k) {
    if ((x - voids[k].center()).norm() < voids[k].radius() * (1.0 - kSurfaceTol)) {
      throw Error(ErrorCode::InsideVoid, "evaluation point inside void " + std::to_string(k));
    }
  }
}

void check_solution(const Problem& problem, const DipoleSolution& sol) {
  if (sol.coeffs.size() != problem.cloud.size()) {
    throw Error(ErrorCode::InvalidArgument, "solution does not match the cloud size");
  }
}

double correction_unchecked(const Vec3& x, const Problem& problem, const DipoleSolution& sol) {
  const auto& voids = problem.cloud.voids();
  const bool ball = problem.domain.is_ball();
  const double R = problem.domain.radius();
  double sum = 0.0;
  for (std::size_t k = 0; k < voids.size(); ++k) {
    const Vec3& c = sol.coeffs[k];
    sum += c.dot(dipole_field_sphere(x, voids[k]));
    if (ball) {
      // Q_k = -2 pi r^3 I for spheres.
      const double a = voids[k].radius();
      const double q = -2.0 * std::numbers::pi * a * a * a;
      sum -= q * c.dot(grad_y_H(x, voids[k].center(), R));
    }
  }
  return sum;
}

}  // namespace

double eval_correction(const Vec3& x, const Problem& problem, const DipoleSolution& sol) {
  check_solution(problem, sol);
  check_point(x, problem);
  return correction_unchecked(x, problem, sol);
}

double eval_uN(const Vec3& x, const Problem& problem, const DipoleSolution& sol) {
  check_solution(problem, sol);
  check_point(x, problem);
  return v_eval(x, problem.background, problem.domain) + correction_unchecked(x, problem, sol);
}

Vec3 grad_uN(const Vec3& x, const Problem& problem, const DipoleSolution& sol) {
  check_solution(problem, sol);
  check_point(x, problem);
  const auto& voids = problem.cloud.voids();
  const bool ball = problem.domain.is_ball();
  const double R = problem.domain.radius();
  Vec3 g = grad_v(x, problem.background, problem.domain);
  for (std::size_t k = 0; k < voids.size(); ++k) {
    const Vec3& c = sol.coeffs[k];
    g += dipole_field_jacobian(x, voids[k]).transpose() * c;
    if (ball) {
      const double a = voids[k].radius();
      const double q = -2.0 * std::numbers::pi * a * a * a;
      g -= q * hess_xy_H(x, voids[k].center(), R) * c;
    }
  }
  return g;
}

std::size_t FieldSamples::n_valid() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{0}));
}

bool is_masked(const Vec3& x, const Problem& problem) {
  if (!problem.domain.contains(x)) {
    return true;
  }
  return std::any_of(problem.cloud.voids().begin(), problem.cloud.voids().end(), [&](const Void& v) {
    return (x - v.center()).norm() < v.radius() + kMaskMargin;
  });
}

FieldSamples sample_points(std::vector<Vec3> points, const Problem& problem, const DipoleSolution& sol) {
  check_solution(problem, sol);
  FieldSamples out;
  const std::size_t n = points.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  out.u_N.assign(n, nan);
  out.v.assign(n, nan);
  out.correction.assign(n, nan);
  out.mask.assign(n, 1);
  out.points = std::move(points);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Vec3& x = out.points[i];
    if (is_masked(x, problem)) {
      continue;
    }
    const double v = v_eval(x, problem.background, problem.domain);
    const double corr = correction_unchecked(x, problem, sol);
    out.v[i] = v;
    out.u_N[i] = v + corr;
    out.correction[i] = out.u_N[i] - v;
    out.mask[i] = 0;
  }
  return out;
}

std::vector<Vec3> line_points(const Vec3& p0, const Vec3& p1, std::size_t n) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "line sampling needs at least two points");
  }
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    pts.push_back((1.0 - t) * p0 + t * p1);
  }
  return pts;
}

FieldSamples sample_line(const Vec3& p0, const Vec3& p1, std::size_t n, const Problem& problem,
                         const DipoleSolution& sol) {
  return sample_points(line_points(p0, p1, n), problem, sol);
}

namespace {

double node(double lo, double hi, std::size_t i, std::size_t n) {
  if (n == 1) {
    return 0.5 * (lo + hi);
  }
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

std::vector<Vec3> grid_points(const GridSpec& spec) {
  const auto& res = spec.resolution;
  if (res[0] == 0 || res[1] == 0 || res[2] == 0) {
    throw Error(ErrorCode::InvalidArgument, "grid resolution must be positive");
  }
  std::vector<Vec3> pts;
  pts.reserve(res[0] * res[1] * res[2]);
  for (std::size_t i = 0; i < res[0]; ++i) {
    for (std::size_t j = 0; j < res[1]; ++j) {
      for (std::size_t k = 0; k < res[2]; ++k) {
        pts.emplace_back(node(spec.box.lo.x(), spec.box.hi.x(), i, res[0]),
                         node(spec.box.lo.y(), spec.box.hi.y(), j, res[1]),
                         node(spec.box.lo.z(), spec.box.hi.z(), k, res[2]));
      }
    }
  }
  return pts;
}

std::vector<Vec3> slice_points(const SliceSpec& spec) {
  if (spec.axis < 0 || spec.axis > 2) {
    throw Error(ErrorCode::InvalidArgument, "slice axis must be 0, 1 or 2");
  }
  if (spec.resolution[0] == 0 || spec.resolution[1] == 0) {
    throw Error(ErrorCode::InvalidArgument, "slice resolution must be positive");
  }
  const int a = (spec.axis + 1) % 3;
  const int b = (spec.axis + 2) % 3;
  std::vector<Vec3> pts;
  pts.reserve(spec.resolution[0] * spec.resolution[1]);
  for (std::size_t i = 0; i < spec.resolution[0]; ++i) {
    for (std::size_t j = 0; j < spec.resolution[1]; ++j) {
      Vec3 p;
      p(spec.axis) = spec.value;
      p(a) = node(spec.lo[0], spec.hi[0], i, spec.resolution[0]);
      p(b) = node(spec.lo[1], spec.hi[1], j, spec.resolution[1]);
      pts.push_back(p);
    }
  }
  return pts;
}

FieldSamples sample_grid(const GridSpec& spec, const Problem& problem, const DipoleSolution& sol) {
  return sample_points(grid_points(spec), problem, sol);
}

FieldSamples sample_slice(const SliceSpec& spec, const Problem& problem, const DipoleSolution& sol) {
  return sample_points(slice_points(spec), problem, sol);
}

BoundaryReport boundary_residuals(const Problem& problem, const DipoleSolution& sol,
                                  std::size_t points_per_surface) {
  check_solution(problem, sol);
  const auto dirs = fibonacci_sphere(points_per_surface);
  const auto& voids = problem.cloud.voids();
  BoundaryReport report;
  report.voids.resize(voids.size());
  for (std::size_t j = 0; j < voids.size(); ++j) {
    const Void& vj = voids[j];
    double max_abs = 0.0;
    double sum_sq = 0.0;
    for (const Vec3& n : dirs) {
      const Vec3 x = vj.center() + vj.radius() * n;
      const double flux = n.dot(grad_uN(x, problem, sol));
      max_abs = std::max(max_abs, std::abs(flux));
      sum_sq += flux * flux;
    }
    const double area = 4.0 * std::numbers::pi * vj.radius() * vj.radius();
    report.voids[j] = {max_abs, std::sqrt(sum_sq / static_cast<double>(dirs.size()) * area)};
    report.max_void_flux = std::max(report.max_void_flux, max_abs);
  }
  if (problem.domain.is_ball()) {
    const double R = problem.domain.radius();
    double max_abs = 0.0;
    for (const Vec3& n : dirs) {
      max_abs = std::max(max_abs, std::abs(eval_uN(R * n, problem, sol)));
    }
    report.outer_max_abs = max_abs;
  }
  return report;
}

}  // namespace mesocloud
