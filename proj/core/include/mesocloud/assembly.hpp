#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mesocloud/geometry.hpp"
#include "mesocloud/kernels.hpp"

namespace mesocloud {

/// Everything that defines one perforated-domain problem.
struct Problem {
  Cloud cloud;
  DomainSpec domain;
  Background background = SourceSpec{};
};

struct AssemblyOptions {
  /// Above this many voids the interaction matrix is not materialized and
  /// its blocks are recomputed inside every matrix-vector product.
  std::size_t matrix_free_threshold = 2000;
};

/// The 3N x 3N coefficient system (I + S Q) C = -theta.
///
/// S holds the pairwise mixed Hessians of the Green's function (zero diagonal
/// blocks), Q the per-void polarization matrices and theta the stacked
/// gradients of the unperturbed solution at the void centres.
class InteractionSystem {
 public:
  InteractionSystem(Problem problem, std::vector<PolarizationMatrix> q, Eigen::VectorXd theta,
                    std::optional<Eigen::MatrixXd> s);

  std::size_t n_voids() const noexcept { return problem_.cloud.size(); }
  bool matrix_free() const noexcept { return !s_.has_value(); }
  const Problem& problem() const noexcept { return problem_; }
  const std::vector<PolarizationMatrix>& q_blocks() const noexcept { return q_; }
  const Eigen::VectorXd& theta() const noexcept { return theta_; }

  /// Block (i, j) of S, read from storage or recomputed in matrix-free mode.
  Mat3 block(std::size_t i, std::size_t j) const;
  /// The dense S; materialized on demand in matrix-free mode.
  Eigen::MatrixXd dense_s() const;
  Eigen::MatrixXd dense_q() const;

  Eigen::VectorXd apply_q(const Eigen::VectorXd& c) const;
  Eigen::VectorXd apply_s(const Eigen::VectorXd& c) const;
  /// (I + S Q) c.
  Eigen::VectorXd apply(const Eigen::VectorXd& c) const;

 private:
  Problem problem_;
  std::vector<PolarizationMatrix> q_;
  Eigen::VectorXd theta_;
  std::optional<Eigen::MatrixXd> s_;
};

/// Builds the coefficient system. Throws CoincidentPoints for repeated void
/// centres, SourceOverlapsCloud if the source ball meets a void and
/// OutsideDomain if a centre lies outside a ball domain.
InteractionSystem assemble(const Problem& problem, const AssemblyOptions& opts = {});

enum class GradNormQuadrature { Auto, Midpoint, MonteCarlo };

struct DiagnosticsOptions {
  GradNormQuadrature quadrature = GradNormQuadrature::Auto;
  int midpoint_cells = 64;
  std::size_t monte_carlo_samples = 1'000'000;
  std::uint64_t seed = 20110721;
  /// Auto switches to Monte Carlo when the longest/shortest box side exceeds this.
  double elongation_threshold = 8.0;
};

struct DipoleSolution {
  std::vector<Vec3> coeffs;
  /// ||(I + S Q) C + theta|| / ||theta|| (absolute when theta vanishes).
  double residual_norm = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  /// lambda_max / d^3; zero when d is infinite.
  double wellposed_ratio = 0.0;
  /// sum |C_j|^2 d^3 / ||grad v||^2 over omega; empty when d is infinite or the norm vanishes.
  std::optional<double> coeff_bound_ratio;
  double grad_v_norm_sq = 0.0;
  std::string method;
  int iterations = 0;
  /// Reciprocal condition estimate of the LU factors (direct solver only).
  std::optional<double> rcond;

  Eigen::VectorXd stacked() const;
};

/// Dense LU solve. Throws SingularSystem if the factorization is numerically singular.
DipoleSolution solve_direct(const InteractionSystem& sys, const DiagnosticsOptions& diag = {});

/// Neumann-series iteration C <- -theta - S Q C starting from zero. Throws
/// NotConvergedError when the residual grows or max_iter is exhausted.
DipoleSolution solve_fixed_point(const InteractionSystem& sys, double tol, int max_iter,
                                 const DiagnosticsOptions& diag = {});

/// Squared L2 norm of grad v over omega (clipped to the domain).
double grad_v_norm_sq(const Problem& problem, const DiagnosticsOptions& diag = {});

struct Diagnostics {
  std::size_t n_voids = 0;
  double eps = 0.0;
  double d = 0.0;
  double residual_norm = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double wellposed_ratio = 0.0;
  std::optional<double> coeff_bound_ratio;
  /// lambda_max / eps^3 and lambda_min / eps^3, the measured eigenvalue-bound constants.
  double a1_ratio = 0.0;
  double a2_ratio = 0.0;
  std::string method;
  int iterations = 0;
};

Diagnostics diagnostics_report(const DipoleSolution& sol, const Cloud& cloud);

}  // namespace mesocloud
