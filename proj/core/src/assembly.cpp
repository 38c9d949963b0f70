#include "mesocloud/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "mesocloud/error.hpp"

namespace mesocloud {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(3 * i); }

void check_centres(const Problem& problem) {
  const auto& voids = problem.cloud.voids();
  for (std::size_t i = 0; i < voids.size(); ++i) {
    const Vec3& oi = voids[i].center();
    if (problem.domain.is_ball() && !(oi.norm() < problem.domain.radius())) {
      throw Error(ErrorCode::OutsideDomain, "void " + std::to_string(i) + " centre outside the ball");
    }
    for (std::size_t j = i + 1; j < voids.size(); ++j) {
      const Vec3& oj = voids[j].center();
      const double r = (oi - oj).norm();
      if (r == 0.0 || r <= kCoincidenceTol * std::max(oi.norm(), oj.norm())) {
        throw Error(ErrorCode::CoincidentPoints,
                    "voids " + std::to_string(i) + " and " + std::to_string(j) + " share a centre");
      }
    }
  }
  if (const auto* src = std::get_if<SourceSpec>(&problem.background)) {
    for (std::size_t i = 0; i < voids.size(); ++i) {
      if (voids[i].center().norm() <= src->rho + voids[i].radius()) {
        std::ostringstream os;
        os << "source ball of radius " << src->rho << " meets void " << i;
        throw Error(ErrorCode::SourceOverlapsCloud, os.str());
      }
    }
  }
}

}  // namespace

InteractionSystem::InteractionSystem(Problem problem, std::vector<PolarizationMatrix> q,
                                     Eigen::VectorXd theta, std::optional<Eigen::MatrixXd> s)
    : problem_(std::move(problem)), q_(std::move(q)), theta_(std::move(theta)), s_(std::move(s)) {}

Mat3 InteractionSystem::block(std::size_t i, std::size_t j) const {
  if (s_) {
    return s_->block<3, 3>(idx(i), idx(j));
  }
  if (i == j) {
    return Mat3::Zero();
  }
  const auto& voids = problem_.cloud.voids();
  return kernel_frakT(voids[i].center(), voids[j].center(), problem_.domain);
}

MatrixXd InteractionSystem::dense_s() const {
  if (s_) {
    return *s_;
  }
  const std::size_t n = n_voids();
  MatrixXd s = MatrixXd::Zero(idx(n), idx(n));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) {
        s.block<3, 3>(idx(i), idx(j)) = block(i, j);
      }
    }
  }
  return s;
}

MatrixXd InteractionSystem::dense_q() const {
  const std::size_t n = n_voids();
  MatrixXd q = MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    q.block<3, 3>(idx(i), idx(i)) = q_[i].matrix();
  }
  return q;
}

VectorXd InteractionSystem::apply_q(const VectorXd& c) const {
  VectorXd out(c.size());
  for (std::size_t i = 0; i < n_voids(); ++i) {
    out.segment<3>(idx(i)) = q_[i].matrix() * c.segment<3>(idx(i));
  }
  return out;
}

VectorXd InteractionSystem::apply_s(const VectorXd& c) const {
  if (s_) {
    return (*s_) * c;
  }
  const std::size_t n = n_voids();
  VectorXd out = VectorXd::Zero(c.size());
  // Fixed summation order per row keeps results independent of the thread count.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Vec3 acc = Vec3::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        acc += block(i, j) * c.segment<3>(idx(j));
      }
    }
    out.segment<3>(idx(i)) = acc;
  }
  return out;
}

VectorXd InteractionSystem::apply(const VectorXd& c) const {
  return c + apply_s(apply_q(c));
}

InteractionSystem assemble(const Problem& problem, const AssemblyOptions& opts) {
  check_centres(problem);
  const auto& voids = problem.cloud.voids();
  const std::size_t n = voids.size();

  std::vector<PolarizationMatrix> q;
  q.reserve(n);
  VectorXd theta(idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    q.push_back(polarization_sphere(voids[i].radius()));
    theta.segment<3>(idx(i)) = grad_v(voids[i].center(), problem.background, problem.domain);
  }

  std::optional<MatrixXd> s;
  if (n <= opts.matrix_free_threshold) {
    MatrixXd dense = MatrixXd::Zero(idx(n), idx(n));
    // Blocks satisfy S_ji = S_ij^T, so only the upper triangle is evaluated.
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t j = i + 1; j < n; ++j) {
        const Mat3 b = kernel_frakT(voids[i].center(), voids[j].center(), problem.domain);
        dense.block<3, 3>(idx(i), idx(j)) = b;
        dense.block<3, 3>(idx(j), idx(i)) = b.transpose();
      }
    }
    s = std::move(dense);
  }
  return InteractionSystem(problem, std::move(q), std::move(theta), std::move(s));
}

Eigen::VectorXd DipoleSolution::stacked() const {
  VectorXd c(idx(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    c.segment<3>(idx(i)) = coeffs[i];
  }
  return c;
}

double grad_v_norm_sq(const Problem& problem, const DiagnosticsOptions& diag) {
  const Box& box = problem.cloud.omega_bounds();
  const Vec3 ext = box.extent();
  if (problem.cloud.empty() || !(ext.minCoeff() > 0.0)) {
    return 0.0;
  }
  const auto integrand = [&](const Vec3& x) {
    if (!problem.domain.contains(x)) {
      return 0.0;
    }
    return grad_v(x, problem.background, problem.domain).squaredNorm();
  };

  bool monte_carlo = diag.quadrature == GradNormQuadrature::MonteCarlo;
  if (diag.quadrature == GradNormQuadrature::Auto) {
    monte_carlo = ext.maxCoeff() / ext.minCoeff() > diag.elongation_threshold;
  }

  if (monte_carlo) {
    std::mt19937_64 rng(diag.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double sum = 0.0;
    for (std::size_t s = 0; s < diag.monte_carlo_samples; ++s) {
      Vec3 u;
      u << unit(rng), unit(rng), unit(rng);
      sum += integrand(box.lo + u.cwiseProduct(ext));
    }
    return sum / static_cast<double>(diag.monte_carlo_samples) * box.volume();
  }

  const int n = std::max(1, diag.midpoint_cells);
  const Vec3 h = ext / n;
  std::vector<double> slab(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 x = box.lo + Vec3((i + 0.5) * h.x(), (j + 0.5) * h.y(), (k + 0.5) * h.z());
        acc += integrand(x);
      }
    }
    slab[static_cast<std::size_t>(i)] = acc;
  }
  double sum = 0.0;
  for (double s : slab) {
    sum += s;
  }
  return sum * h.prod();
}

namespace {

void fill_diagnostics(DipoleSolution& sol, const InteractionSystem& sys, const DiagnosticsOptions& diag) {
  const Cloud& cloud = sys.problem().cloud;
  sol.lambda_max = 0.0;
  sol.lambda_min = 0.0;
  if (!sys.q_blocks().empty()) {
    sol.lambda_min = std::numeric_limits<double>::infinity();
    for (const auto& q : sys.q_blocks()) {
      sol.lambda_max = std::max(sol.lambda_max, q.lambda_max());
      sol.lambda_min = std::min(sol.lambda_min, q.lambda_min());
    }
  }
  const double d = cloud.d();
  sol.wellposed_ratio = std::isfinite(d) ? sol.lambda_max / (d * d * d) : 0.0;
  sol.grad_v_norm_sq = grad_v_norm_sq(sys.problem(), diag);
  sol.coeff_bound_ratio.reset();
  if (std::isfinite(d) && sol.grad_v_norm_sq > 0.0) {
    double sum = 0.0;
    for (const auto& c : sol.coeffs) {
      sum += c.squaredNorm();
    }
    sol.coeff_bound_ratio = sum * d * d * d / sol.grad_v_norm_sq;
  }
}

double relative_residual(const InteractionSystem& sys, const VectorXd& c) {
  const double scale = sys.theta().norm();
  const double r = (sys.apply(c) + sys.theta()).norm();
  return scale > 0.0 ? r / scale : r;
}

std::vector<Vec3> unstack(const VectorXd& c) {
  std::vector<Vec3> out(static_cast<std::size_t>(c.size() / 3));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c.segment<3>(idx(i));
  }
  return out;
}

}  // namespace

DipoleSolution solve_direct(const InteractionSystem& sys, const DiagnosticsOptions& diag) {
  const std::size_t n = sys.n_voids();
  DipoleSolution sol;
  sol.method = "direct";
  if (n == 0) {
    fill_diagnostics(sol, sys, diag);
    return sol;
  }
  MatrixXd a = sys.dense_s();
  for (std::size_t j = 0; j < n; ++j) {
    a.middleCols<3>(idx(j)) = a.middleCols<3>(idx(j)) * sys.q_blocks()[j].matrix();
  }
  a.diagonal().array() += 1.0;

  Eigen::PartialPivLU<MatrixXd> lu(a);
  // The condition estimate is unreliable once a pivot is exactly zero, so
  // the pivot ratio is checked as well.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = pivots.minCoeff() <= 1e-14 * pivots.maxCoeff() ? 0.0 : lu.rcond();
  const VectorXd c = lu.solve(-sys.theta());
  if (!(rcond > 1e-14) || !c.allFinite()) {
    std::ostringstream os;
    os << "I + S Q is numerically singular (reciprocal condition estimate " << rcond
       << "); the cloud is likely outside the mesoscale regime";
    throw Error(ErrorCode::SingularSystem, os.str());
  }
  sol.coeffs = unstack(c);
  sol.rcond = rcond;
  sol.residual_norm = relative_residual(sys, c);
  fill_diagnostics(sol, sys, diag);
  return sol;
}

DipoleSolution solve_fixed_point(const InteractionSystem& sys, double tol, int max_iter,
                                 const DiagnosticsOptions& diag) {
  if (!(tol > 0.0) || max_iter < 1) {
    throw Error(ErrorCode::InvalidArgument, "fixed-point solver needs tol > 0 and max_iter >= 1");
  }
  DipoleSolution sol;
  sol.method = "fixed_point";
  const VectorXd& theta = sys.theta();
  const double scale = theta.norm() > 0.0 ? theta.norm() : 1.0;

  VectorXd c = VectorXd::Zero(theta.size());
  double first = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it <= max_iter; ++it) {
    const VectorXd next = -theta - sys.apply_s(sys.apply_q(c));
    // (I + S Q) c + theta == c - next, so the residual of c comes for free.
    const double res = (c - next).norm() / scale;
    if (it == 0) {
      first = res;
    }
    if (res <= tol) {
      sol.coeffs = unstack(c);
      sol.iterations = it;
      sol.residual_norm = res;
      fill_diagnostics(sol, sys, diag);
      return sol;
    }
    if (!std::isfinite(res) || res > 1e6 * std::max(first, 1.0)) {
      throw NotConvergedError(it, res, "fixed-point iteration diverged (spectral radius of S Q >= 1)");
    }
    if (it == max_iter) {
      throw NotConvergedError(it, res, "fixed-point iteration hit max_iter without reaching tol");
    }
    c = next;
  }
  throw NotConvergedError(max_iter, first, "unreachable");
}

Diagnostics diagnostics_report(const DipoleSolution& sol, const Cloud& cloud) {
  Diagnostics out;
  out.n_voids = cloud.size();
  out.eps = cloud.eps();
  out.d = cloud.d();
  out.residual_norm = sol.residual_norm;
  out.lambda_max = sol.lambda_max;
  out.lambda_min = sol.lambda_min;
  out.wellposed_ratio = sol.wellposed_ratio;
  out.coeff_bound_ratio = sol.coeff_bound_ratio;
  const double eps3 = cloud.eps() * cloud.eps() * cloud.eps();
  if (eps3 > 0.0) {
    out.a1_ratio = sol.lambda_max / eps3;
    out.a2_ratio = sol.lambda_min / eps3;
  }
  out.method = sol.method;
  out.iterations = sol.iterations;
  return out;
}

}  // namespace mesocloud
