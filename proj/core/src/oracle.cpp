#include "mesocloud/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "mesocloud/error.hpp"
#include "mesocloud/field.hpp"

namespace mesocloud {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

ReferenceSolution::ReferenceSolution(Problem problem, std::vector<Vec3> sources, VectorXd charges,
                                     double residual, Index rank)
    : problem_(std::move(problem)),
      sources_(std::move(sources)),
      charges_(std::move(charges)),
      residual_(residual),
      rank_(rank) {}

double ReferenceSolution::value(const Vec3& x) const {
  double u = v_eval(x, problem_.background, problem_.domain);
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    u += charges_(static_cast<Index>(s)) * green(x, sources_[s], problem_.domain);
  }
  return u;
}

Vec3 ReferenceSolution::gradient(const Vec3& x) const {
  Vec3 g = grad_v(x, problem_.background, problem_.domain);
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    g += charges_(static_cast<Index>(s)) * grad_x_green(x, sources_[s], problem_.domain);
  }
  return g;
}

ReferenceSolution solve_reference(const Problem& problem, const MfsConfig& cfg) {
  if (!(cfg.source_depth > 0.0 && cfg.source_depth < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "MFS source depth must lie in (0, 1)");
  }
  const std::size_t n_src = cfg.sources_per_void;
  const std::size_t n_col = cfg.collocation_per_void == 0 ? 2 * n_src : cfg.collocation_per_void;
  if (n_src == 0 || n_col < n_src) {
    throw Error(ErrorCode::InvalidArgument, "MFS needs collocation_per_void >= sources_per_void > 0");
  }
  const auto& voids = problem.cloud.voids();
  const std::size_t n = voids.size();
  if (n * n_src > cfg.max_total_sources) {
    std::ostringstream os;
    os << "MFS source budget exceeded: " << n << " voids x " << n_src << " sources > "
       << cfg.max_total_sources;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  if (n == 0) {
    return ReferenceSolution(problem, {}, VectorXd(), 0.0, 0);
  }

  const auto src_dirs = fibonacci_sphere(n_src);
  const auto col_dirs = fibonacci_sphere(n_col);
  std::vector<Vec3> sources;
  sources.reserve(n * n_src);
  for (const auto& v : voids) {
    for (const auto& u : src_dirs) {
      sources.push_back(v.center() + cfg.source_depth * v.radius() * u);
    }
  }

  const auto rows = static_cast<Index>(n * n_col);
  const auto cols = static_cast<Index>(sources.size());
  MatrixXd a(rows, cols);
  VectorXd b(rows);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t k = 0; k < n_col; ++k) {
      const Vec3& nrm = col_dirs[k];
      const Vec3 x = voids[j].center() + voids[j].radius() * nrm;
      const auto row = static_cast<Index>(j * n_col + k);
      b(row) = -nrm.dot(grad_v(x, problem.background, problem.domain));
      for (Index c = 0; c < cols; ++c) {
        a(row, c) = nrm.dot(grad_x_green(x, sources[static_cast<std::size_t>(c)], problem.domain));
      }
    }
  }

  // Column equilibration before the rank-revealing orthogonal factorization.
  VectorXd col_scale = a.colwise().norm().transpose();
  for (Index c = 0; c < cols; ++c) {
    col_scale(c) = col_scale(c) > 0.0 ? 1.0 / col_scale(c) : 1.0;
  }
  a = a * col_scale.asDiagonal();
  // Blocked Householder QR first; the pivoted complete orthogonal
  // decomposition (with spectrum truncation) only when R reveals near rank
  // deficiency.
  VectorXd y;
  Index rank = cols;
  {
    Eigen::HouseholderQR<MatrixXd> qr(a);
    const VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
    if (diag.minCoeff() > cfg.truncation * diag.maxCoeff()) {
      y = qr.solve(b);
    } else {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
      cod.setThreshold(cfg.truncation);
      cod.compute(a);
      y = cod.solve(b);
      rank = cod.rank();
    }
  }
  const VectorXd charges = col_scale.cwiseProduct(y);

  ReferenceSolution ref(problem, std::move(sources), charges, 0.0, rank);

  // Residual on a lattice distinct from the collocation points.
  const auto check_dirs = fibonacci_sphere(2 * n_col + 1);
  double flux_scale = 0.0;
  for (const auto& v : voids) {
    flux_scale = std::max(flux_scale, grad_v(v.center(), problem.background, problem.domain).norm());
  }
  if (!(flux_scale > 0.0)) {
    flux_scale = 1.0;
  }
  double max_flux = 0.0;
  for (const auto& v : voids) {
    for (const auto& nrm : check_dirs) {
      const Vec3 x = v.center() + v.radius() * nrm;
      max_flux = std::max(max_flux, std::abs(nrm.dot(ref.gradient(x))));
    }
  }
  const double residual = max_flux / flux_scale;
  if (!(residual <= cfg.max_residual)) {
    std::ostringstream os;
    os << "MFS boundary residual " << residual << " exceeds " << cfg.max_residual
       << "; increase sources_per_void";
    throw OracleNotConvergedError(residual, os.str());
  }
  return ReferenceSolution(ref.problem(), ref.sources(), ref.charges(), residual, ref.rank());
}

ErrorReport compare_fields(const ScalarField& approx, const ScalarField& reference,
                           const std::vector<Vec3>& points) {
  ErrorReport report;
  report.pointwise.reserve(points.size());
  double max_ref = 0.0;
  double sum_diff = 0.0;
  double sum_ref = 0.0;
  for (const auto& x : points) {
    const double a = approx(x);
    const double r = reference(x);
    report.pointwise.push_back({x, a, r});
    report.max_abs = std::max(report.max_abs, std::abs(a - r));
    max_ref = std::max(max_ref, std::abs(r));
    sum_diff += (a - r) * (a - r);
    sum_ref += r * r;
  }
  report.n_points = points.size();
  report.max_rel = max_ref > 0.0 ? report.max_abs / max_ref : report.max_abs;
  report.l2_rel = sum_ref > 0.0 ? std::sqrt(sum_diff / sum_ref) : std::sqrt(sum_diff);
  return report;
}

ErrorReport compare(const Problem& problem, const DipoleSolution& sol, const ReferenceSolution& ref,
                    const std::vector<Vec3>& points) {
  ErrorReport report = compare_fields([&](const Vec3& x) { return eval_uN(x, problem, sol); },
                                      [&](const Vec3& x) { return ref.value(x); }, points);
  report.oracle_residual = ref.residual();
  return report;
}

std::vector<Vec3> bulk_points(const std::vector<Vec3>& points, const Problem& problem, double margin_factor) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    if (!problem.domain.contains(x)) {
      continue;
    }
    const bool near = std::any_of(problem.cloud.voids().begin(), problem.cloud.voids().end(),
                                  [&](const Void& v) {
                                    return (x - v.center()).norm() < (1.0 + margin_factor) * v.radius();
                                  });
    if (!near) {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace mesocloud
