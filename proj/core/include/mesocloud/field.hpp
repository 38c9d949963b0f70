#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mesocloud/assembly.hpp"

namespace mesocloud {

/// Asymptotic approximation u_N(x) = v(x) + sum_k C_k . (D_k(x) - Q_k grad_y H(x, O_k)).
/// Throws InsideVoid or OutsideDomain for points where u_N is undefined.
double eval_uN(const Vec3& x, const Problem& problem, const DipoleSolution& sol);
/// u_N(x) - v(x).
double eval_correction(const Vec3& x, const Problem& problem, const DipoleSolution& sol);
Vec3 grad_uN(const Vec3& x, const Problem& problem, const DipoleSolution& sol);

/// Sampled field values. Masked points (inside or on a void, or outside the
/// domain) carry NaN in every value column.
struct FieldSamples {
  std::vector<Vec3> points;
  std::vector<double> u_N;
  std::vector<double> v;
  std::vector<double> correction;
  std::vector<std::uint8_t> mask;  // 1 = excluded

  std::size_t size() const noexcept { return points.size(); }
  std::size_t n_valid() const noexcept;
};

/// Points within radius + kMaskMargin of a void centre are masked.
inline constexpr double kMaskMargin = 1e-9;

bool is_masked(const Vec3& x, const Problem& problem);

FieldSamples sample_points(std::vector<Vec3> points, const Problem& problem, const DipoleSolution& sol);

/// n equally spaced points from p0 to p1 inclusive (n >= 2).
std::vector<Vec3> line_points(const Vec3& p0, const Vec3& p1, std::size_t n);
FieldSamples sample_line(const Vec3& p0, const Vec3& p1, std::size_t n, const Problem& problem,
                         const DipoleSolution& sol);

/// Uniform box grid with res[i] nodes along axis i, endpoints included.
struct GridSpec {
  Box box;
  std::array<std::size_t, 3> resolution{2, 2, 2};
};

/// Plane slice {x[axis] == value} over the rectangle spanned by the other two axes.
struct SliceSpec {
  int axis = 2;
  double value = 0.0;
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<std::size_t, 2> resolution{41, 41};
};

std::vector<Vec3> grid_points(const GridSpec& spec);
std::vector<Vec3> slice_points(const SliceSpec& spec);
FieldSamples sample_grid(const GridSpec& spec, const Problem& problem, const DipoleSolution& sol);
FieldSamples sample_slice(const SliceSpec& spec, const Problem& problem, const DipoleSolution& sol);

struct VoidFlux {
  double max_abs = 0.0;
  /// L2 norm of the normal derivative over the void surface.
  double l2 = 0.0;
};

struct BoundaryReport {
  std::vector<VoidFlux> voids;
  double max_void_flux = 0.0;
  /// max |u_N| on |x| = R for ball domains.
  std::optional<double> outer_max_abs;
};

/// Normal-derivative residual on every void surface and the Dirichlet residual
/// on the outer sphere, sampled on Fibonacci lattices.
BoundaryReport boundary_residuals(const Problem& problem, const DipoleSolution& sol,
                                  std::size_t points_per_surface = 200);

}  // namespace mesocloud
