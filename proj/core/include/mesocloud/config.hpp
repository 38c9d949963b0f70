#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mesocloud/assembly.hpp"
#include "mesocloud/field.hpp"
#include "mesocloud/oracle.hpp"

namespace mesocloud {

enum class SolverMethod { Direct, FixedPoint };

struct SolverConfig {
  SolverMethod method = SolverMethod::Direct;
  double tol = 1e-12;
  int max_iter = 1000;
  std::size_t matrix_free_threshold = 2000;
};

struct LineOutput {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::UnitX();
  std::size_t n = 100;
};

struct OutputConfig {
  std::optional<LineOutput> line;
  std::optional<GridSpec> grid;
  std::optional<SliceSpec> slice;
};

struct CompareConfig {
  double threshold = 0.03;
  /// Evaluation points keep at least margin_factor * radius from each void surface.
  double margin_factor = 1.0;
  /// Defaults to the z = 0 plane over the domain (ball) or omega (free space).
  std::optional<SliceSpec> plane;
  MfsConfig mfs;
  /// When non-empty, compare-oracle repeats the comparison with all radii
  /// scaled by each factor and fits an order.
  std::vector<double> radius_scales;
};

struct Table1Cloud {};

using CloudSource = std::variant<std::vector<Void>, CloudGridSpec, Table1Cloud>;

/// Parsed run configuration. Every field is validated at parse time.
struct RunConfig {
  DomainSpec domain;
  Background background = SourceSpec{};
  CloudSource cloud = std::vector<Void>{};
  SolverConfig solver;
  OutputConfig outputs;
  CompareConfig compare;
  DiagnosticsOptions diagnostics;
  double mesoscale_c = 1.0;
};

/// Throws Error(ConfigError) naming the offending field path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

Problem build_problem(const RunConfig& cfg);

/// Default comparison plane: z = 0 over [-R, R]^2 (ball) or the xy-extent of omega.
SliceSpec default_compare_plane(const Problem& problem);

/// Uniform scaling of every void radius about its fixed centre.
Cloud scale_radii(const Cloud& cloud, double factor);

}  // namespace mesocloud
