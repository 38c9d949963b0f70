#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mesocloud/types.hpp"

namespace mesocloud {

/// One spherical perforation.
class Void {
 public:
  /// Throws InvalidArgument unless radius is finite and positive.
  Void(const Vec3& center, double radius);

  const Vec3& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

 private:
  Vec3 center_;
  double radius_;
};

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 extent() const { return hi - lo; }
  double volume() const { return extent().prod(); }
  bool contains(const Vec3& p) const;
  /// True if p lies in the open interior of the box.
  bool contains_strictly(const Vec3& p) const;
};

/// Ordered void configuration with its derived mesoscale parameters.
///
/// eps is the largest void diameter and d is half the smallest centre
/// spacing (+inf when fewer than two voids). Unless given explicitly, the
/// enclosing set omega is the bounding box of the voids inflated by 2d, or by
/// eps when d is infinite.
class Cloud {
 public:
  Cloud() = default;
  explicit Cloud(std::vector<Void> voids);
  /// Uses the given enclosing box as omega; throws InvalidArgument unless
  /// every void lies strictly inside it.
  Cloud(std::vector<Void> voids, const Box& omega);

  const std::vector<Void>& voids() const noexcept { return voids_; }
  std::size_t size() const noexcept { return voids_.size(); }
  bool empty() const noexcept { return voids_.empty(); }
  const Void& operator[](std::size_t i) const { return voids_[i]; }

  double eps() const noexcept { return eps_; }
  double d() const noexcept { return d_; }
  const Box& omega_bounds() const noexcept { return omega_; }
  double max_radius() const noexcept { return eps_ / 2.0; }
  double min_radius() const noexcept { return min_radius_; }

 private:
  std::vector<Void> voids_;
  double eps_ = 0.0;
  double d_ = std::numeric_limits<double>::infinity();
  double min_radius_ = 0.0;
  Box omega_;
};

struct FreeSpace {};

struct Ball {
  double radius;
};

/// The unperturbed domain: all of R^3 or a ball centred at the origin with a
/// homogeneous Dirichlet condition on its surface.
class DomainSpec {
 public:
  DomainSpec() : variant_(FreeSpace{}) {}

  static DomainSpec free_space() { return DomainSpec(); }
  /// Throws InvalidArgument unless R is finite and positive.
  static DomainSpec ball(double R);

  bool is_ball() const noexcept { return std::holds_alternative<Ball>(variant_); }
  /// Ball radius; +inf for free space.
  double radius() const noexcept;
  bool contains(const Vec3& x) const;

  const std::variant<FreeSpace, Ball>& variant() const noexcept { return variant_; }

 private:
  explicit DomainSpec(Ball b) : variant_(b) {}
  std::variant<FreeSpace, Ball> variant_;
};

/// Parameters of the non-uniform cube cloud: m^3 voids in a cube of the given
/// side, sized so that the total void volume is beta * side^3.
struct CloudGridSpec {
  int m = 2;
  Vec3 center = Vec3::Zero();
  double side = 1.0;
  double beta = 0.1;
};

/// Scaling factor of the largest void class so that the void volume fraction
/// of an m^3 cloud equals beta. Throws NonPositiveRadicand if beta is too small.
double alpha_for(int m, double beta);

/// Limit of alpha_for as m grows without bound.
double alpha_infinity(double beta);

/// The generated cloud uses the generator cube itself as omega.
Cloud make_grid_cloud(const CloudGridSpec& spec);

/// The 18-void parallelepiped cloud in a ball of radius 120.
std::pair<Cloud, DomainSpec> make_table1_cloud();

enum class ViolationKind { Overlap, OutsideDomain, Mesoscale };
enum class Severity { Warning, Error };

struct Violation {
  ViolationKind kind;
  Severity severity;
  std::size_t first;
  std::size_t second;  // equals first for single-void violations
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const noexcept { return violations.empty(); }
  /// No error-severity violations; mesoscale warnings are tolerated.
  bool admissible() const noexcept;
};

/// Checks pairwise disjointness, containment in the domain and the mesoscale
/// constraint eps < c * d. Never throws for a well-formed cloud.
ValidationReport validate_cloud(const Cloud& cloud, const DomainSpec& domain,
                                double mesoscale_c = 1.0);

/// n quasi-uniform unit vectors on the sphere (Fibonacci lattice).
std::vector<Vec3> fibonacci_sphere(std::size_t n);

std::string_view to_string(ViolationKind kind) noexcept;
std::string_view to_string(Severity severity) noexcept;

}  // namespace mesocloud
