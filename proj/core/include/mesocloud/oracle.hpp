#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "mesocloud/assembly.hpp"

namespace mesocloud {

/// Method-of-fundamental-solutions settings for the reference solver.
struct MfsConfig {
  std::size_t sources_per_void = 64;
  /// Sources sit on a concentric sphere of radius source_depth * radius.
  double source_depth = 0.5;
  /// Zero selects 2 * sources_per_void.
  std::size_t collocation_per_void = 0;
  double max_residual = 1e-6;
  /// Relative singular-value cutoff of the least-squares solve.
  double truncation = 1e-12;
  /// Upper bound on the total number of point sources.
  std::size_t max_total_sources = 50'000;
};

/// Reference field u_ref = v + sum_s q_s G(x, y_s) with point sources inside
/// the voids. The outer Dirichlet condition (or decay) holds by construction;
/// the charges fit the Neumann condition on the void surfaces in least squares.
class ReferenceSolution {
 public:
  ReferenceSolution(Problem problem, std::vector<Vec3> sources, Eigen::VectorXd charges, double residual,
                    Eigen::Index rank);

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;

  const Problem& problem() const noexcept { return problem_; }
  const std::vector<Vec3>& sources() const noexcept { return sources_; }
  const Eigen::VectorXd& charges() const noexcept { return charges_; }
  /// max |d u_ref / dn| over check points on the void surfaces, relative to max_j |grad v(O_j)|.
  double residual() const noexcept { return residual_; }
  /// Numerical rank of the least-squares system; below the source count
  /// the spectrum was truncated.
  Eigen::Index rank() const noexcept { return rank_; }
  bool truncated() const noexcept { return rank_ < charges_.size(); }

 private:
  Problem problem_;
  std::vector<Vec3> sources_;
  Eigen::VectorXd charges_;
  double residual_;
  Eigen::Index rank_;
};

/// Throws OracleNotConvergedError when the achieved residual exceeds
/// cfg.max_residual and InvalidArgument when the source budget is exceeded.
ReferenceSolution solve_reference(const Problem& problem, const MfsConfig& cfg = {});

struct PointError {
  Vec3 x;
  double approx;
  double reference;
};

struct ErrorReport {
  /// max |a - r| / max |r|.
  double max_rel = 0.0;
  /// ||a - r||_2 / ||r||_2 over the points.
  double l2_rel = 0.0;
  double max_abs = 0.0;
  std::size_t n_points = 0;
  double oracle_residual = 0.0;
  std::vector<PointError> pointwise;
};

using ScalarField = std::function<double(const Vec3&)>;

/// Compares two fields on the given points. The reference field supplies the
/// normalization, so swapping the arguments changes max_rel only through the
/// denominator.
ErrorReport compare_fields(const ScalarField& approx, const ScalarField& reference,
                           const std::vector<Vec3>& points);

ErrorReport compare(const Problem& problem, const DipoleSolution& sol, const ReferenceSolution& ref,
                    const std::vector<Vec3>& points);

/// Keeps the points inside the domain whose distance to every void surface is
/// at least margin_factor times that void's radius.
std::vector<Vec3> bulk_points(const std::vector<Vec3>& points, const Problem& problem,
                              double margin_factor = 1.0);

}  // namespace mesocloud
