#include "mesocloud/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mesocloud/error.hpp"

namespace mesocloud {

Void::Void(const Vec3& center, double radius) : center_(center), radius_(radius) {
  if (!center.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "void centre must be finite");
  }
  if (!std::isfinite(radius) || radius <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "void radius must be positive, got " + std::to_string(radius));
  }
}

bool Box::contains(const Vec3& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

bool Box::contains_strictly(const Vec3& p) const {
  return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
}

Cloud::Cloud(std::vector<Void> voids)
    : voids_(std::move(voids)) {
  if (voids_.empty()) {
    return;
  }
  double max_r = 0.0;
  min_radius_ = std::numeric_limits<double>::infinity();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& v : voids_) {
    max_r = std::max(max_r, v.radius());
    min_radius_ = std::min(min_radius_, v.radius());
    lo = lo.cwiseMin(v.center() - Vec3::Constant(v.radius()));
    hi = hi.cwiseMax(v.center() + Vec3::Constant(v.radius()));
  }
  eps_ = 2.0 * max_r;

  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < voids_.size(); ++i) {
    for (std::size_t j = i + 1; j < voids_.size(); ++j) {
      min_dist = std::min(min_dist, (voids_[i].center() - voids_[j].center()).norm());
    }
  }
  d_ = 0.5 * min_dist;

  const double pad = std::isfinite(d_) ? 2.0 * d_ : eps_;
  omega_.lo = lo - Vec3::Constant(pad);
  omega_.hi = hi + Vec3::Constant(pad);
}

Cloud::Cloud(std::vector<Void> voids, const Box& omega) : Cloud(std::move(voids)) {
  for (std::size_t i = 0; i < voids_.size(); ++i) {
    const Vec3 r = Vec3::Constant(voids_[i].radius());
    if (!omega.contains_strictly(voids_[i].center() - r) || !omega.contains_strictly(voids_[i].center() + r)) {
      throw Error(ErrorCode::InvalidArgument, "void " + std::to_string(i) + " is not strictly inside omega");
    }
  }
  omega_ = omega;
}

DomainSpec DomainSpec::ball(double R) {
  if (!std::isfinite(R) || R <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
  }
  return DomainSpec(Ball{R});
}

double DomainSpec::radius() const noexcept {
  if (const auto* b = std::get_if<Ball>(&variant_)) {
    return b->radius;
  }
  return std::numeric_limits<double>::infinity();
}

bool DomainSpec::contains(const Vec3& x) const {
  return !is_ball() || x.norm() <= radius() * (1.0 + kSurfaceTol);
}

double alpha_infinity(double beta) {
  double radicand = 12.0 * beta / std::numbers::pi - 8.0 / 125.0;
  // Absorb rounding when beta sits exactly at the zero of the radicand.
  if (std::abs(radicand) < 1e-14) {
    radicand = 0.0;
  }
  if (!(radicand >= 0.0)) {
    throw Error(ErrorCode::NonPositiveRadicand,
                "alpha_infinity: 12*beta/pi - 8/125 is negative for beta = " + std::to_string(beta));
  }
  return std::cbrt(radicand);
}

double alpha_for(int m, double beta) {
  if (m < 2) {
    throw Error(ErrorCode::InvalidArgument, "alpha_for requires m >= 2");
  }
  const double md = m;
  const double bracket =
      3.0 * beta / (4.0 * std::numbers::pi) - (125.0 + 32.0 * (md - 1.0)) / (8000.0 * md);
  const double radicand = 16.0 * md / (md - 1.0) * bracket;
  if (!(radicand > 0.0)) {
    std::ostringstream os;
    os << "alpha_for: cube-root argument " << radicand << " <= 0 for m = " << m
       << ", beta = " << beta;
    throw Error(ErrorCode::NonPositiveRadicand, os.str());
  }
  return std::cbrt(radicand);
}

Cloud make_grid_cloud(const CloudGridSpec& spec) {
  if (!(spec.side > 0.0) || !(spec.beta > 0.0 && spec.beta < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid cloud needs side > 0 and beta in (0, 1)");
  }
  const double alpha = alpha_for(spec.m, spec.beta);
  const int m = spec.m;
  const double h = spec.side / m;
  const Vec3 corner = spec.center - Vec3::Constant(spec.side / 2.0);

  std::vector<Void> voids;
  voids.reserve(static_cast<std::size_t>(m) * m * m);
  for (int p = 1; p <= m; ++p) {
    for (int q = 1; q <= m; ++q) {
      for (int r = 1; r <= m; ++r) {
        const Vec3 c = corner + Vec3((2 * p - 1) * h / 2.0, (2 * q - 1) * h / 2.0, (2 * r - 1) * h / 2.0);
        double radius;
        if (p > q) {
          radius = h / 5.0;
        } else if (p < q) {
          radius = alpha * h / 2.0;
        } else {
          radius = h / 4.0;
        }
        voids.emplace_back(c, radius);
      }
    }
  }
  const Vec3 half = Vec3::Constant(spec.side / 2.0);
  return Cloud(std::move(voids), Box{spec.center - half, spec.center + half});
}

std::pair<Cloud, DomainSpec> make_table1_cloud() {
  constexpr double R = 120.0;
  struct Row {
    double x, y, z, ratio;
  };
  // Centres and radius-to-R ratios as printed, voids 1..18.
  static constexpr Row rows[] = {
      {-50, 0, 0, 0.0417},   {-50, 0, 22, 0.0333},   {-50, 22, 0, 0.0292},
      {-50, 0, -22, 0.0375}, {-50, -22, 0, 0.0458},  {-50, 22, 22, 0.0292},
      {-50, 22, -22, 0.025}, {-50, -22, 22, 0.0375}, {-50, -22, -22, 0.0375},
      {-72, 0, 0, 0.0417},   {-72, 0, 22, 0.0458},   {-72, 22, 0, 0.0292},
      {-72, 0, -22, 0.0375}, {-72, -22, 0, 0.0417},  {-72, 22, 22, 0.0333},
      {-72, 22, -22, 0.05},  {-72, -22, 22, 0.0333}, {-72, -22, -22, 0.0375},
  };
  std::vector<Void> voids;
  voids.reserve(std::size(rows));
  for (const auto& row : rows) {
    voids.emplace_back(Vec3(row.x, row.y, row.z), row.ratio * R);
  }
  return {Cloud(std::move(voids)), DomainSpec::ball(R)};
}

bool ValidationReport::admissible() const noexcept {
  return std::none_of(violations.begin(), violations.end(),
                      [](const Violation& v) { return v.severity == Severity::Error; });
}

ValidationReport validate_cloud(const Cloud& cloud, const DomainSpec& domain, double mesoscale_c) {
  ValidationReport report;
  const auto& voids = cloud.voids();
  for (std::size_t i = 0; i < voids.size(); ++i) {
    for (std::size_t j = i + 1; j < voids.size(); ++j) {
      const double dist = (voids[i].center() - voids[j].center()).norm();
      if (dist <= voids[i].radius() + voids[j].radius()) {
        std::ostringstream os;
        os << "voids " << i << " and " << j << " overlap: centre distance " << dist
           << " <= radius sum " << voids[i].radius() + voids[j].radius();
        report.violations.push_back({ViolationKind::Overlap, Severity::Error, i, j, os.str()});
      }
    }
  }
  if (domain.is_ball()) {
    const double R = domain.radius();
    for (std::size_t i = 0; i < voids.size(); ++i) {
      const double reach = voids[i].center().norm() + voids[i].radius();
      if (reach >= R) {
        std::ostringstream os;
        os << "void " << i << " reaches |x| = " << reach << " >= R = " << R;
        report.violations.push_back({ViolationKind::OutsideDomain, Severity::Error, i, i, os.str()});
      }
    }
  }
  if (std::isfinite(cloud.d()) && !(cloud.eps() < mesoscale_c * cloud.d())) {
    std::ostringstream os;
    os << "mesoscale constraint eps < c*d violated: eps = " << cloud.eps() << ", d = " << cloud.d()
       << ", c = " << mesoscale_c;
    report.violations.push_back({ViolationKind::Mesoscale, Severity::Warning, 0, 0, os.str()});
  }
  return report;
}

std::vector<Vec3> fibonacci_sphere(std::size_t n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(k);
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::Overlap: return "overlap";
    case ViolationKind::OutsideDomain: return "outside_domain";
    case ViolationKind::Mesoscale: return "mesoscale";
  }
  return "unknown";
}

std::string_view to_string(Severity severity) noexcept {
  return severity == Severity::Error ? "error" : "warning";
}

}  // namespace mesocloud
