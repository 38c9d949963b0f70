#include "mesocloud/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

#include "mesocloud/error.hpp"
#include "mesocloud/io.hpp"

namespace mesocloud {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

/// JSON object view that remembers its path for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!j_.is_object()) {
      fail(path_, "expected an object");
    }
    for (const auto& [key, _] : j_.items()) {
      bool ok = false;
      for (auto a : allowed) {
        ok = ok || key == a;
      }
      if (!ok) {
        fail(child_path(key), "unknown field");
      }
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }

  Node at(std::string_view key) const {
    if (!has(key)) {
      fail(child_path(key), "missing required field");
    }
    return Node(j_.at(std::string(key)), child_path(key));
  }

  double number(std::string_view key) const {
    const Node n = at(key);
    if (!n.j_.is_number()) {
      fail(n.path_, "expected a number");
    }
    return n.j_.get<double>();
  }

  double number_or(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  long long integer(std::string_view key) const {
    const Node n = at(key);
    if (!n.j_.is_number_integer()) {
      fail(n.path_, "expected an integer");
    }
    return n.j_.get<long long>();
  }

  long long integer_or(std::string_view key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::string string(std::string_view key) const {
    const Node n = at(key);
    if (!n.j_.is_string()) {
      fail(n.path_, "expected a string");
    }
    return n.j_.get<std::string>();
  }

  Vec3 vec3(std::string_view key) const {
    const Node n = at(key);
    if (!n.j_.is_array() || n.j_.size() != 3) {
      fail(n.path_, "expected an array of three numbers");
    }
    Vec3 v;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!n.j_[i].is_number()) {
        fail(n.path_ + "[" + std::to_string(i) + "]", "expected a number");
      }
      v(static_cast<Eigen::Index>(i)) = n.j_[i].get<double>();
    }
    return v;
  }

  template <std::size_t N, typename T>
  std::array<T, N> array(std::string_view key) const {
    const Node n = at(key);
    if (!n.j_.is_array() || n.j_.size() != N) {
      fail(n.path_, "expected an array of " + std::to_string(N) + " entries");
    }
    std::array<T, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      const json& e = n.j_[i];
      if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer() || e.get<long long>() < 1) {
          fail(n.path_ + "[" + std::to_string(i) + "]", "expected a positive integer");
        }
      } else if (!e.is_number()) {
        fail(n.path_ + "[" + std::to_string(i) + "]", "expected a number");
      }
      out[i] = e.get<T>();
    }
    return out;
  }

 private:
  std::string child_path(std::string_view key) const { return path_ + "." + std::string(key); }

  const json& j_;
  std::string path_;
};

double positive(double x, const std::string& path) {
  if (!(x > 0.0)) {
    fail(path, "expected a positive number");
  }
  return x;
}

DomainSpec parse_domain(const Node& n) {
  n.expect_object({"type", "R"});
  const std::string type = n.string("type");
  if (type == "free_space") {
    if (n.has("R")) {
      fail(n.path() + ".R", "free_space takes no radius");
    }
    return DomainSpec::free_space();
  }
  if (type == "ball") {
    return DomainSpec::ball(positive(n.number("R"), n.path() + ".R"));
  }
  fail(n.path() + ".type", "expected \"free_space\" or \"ball\"");
}

CloudGridSpec parse_grid(const Node& n) {
  n.expect_object({"m", "center", "side", "beta"});
  CloudGridSpec g;
  const long long m = n.integer("m");
  if (m < 2 || m > 100) {
    fail(n.path() + ".m", "expected an integer in [2, 100]");
  }
  g.m = static_cast<int>(m);
  g.center = n.vec3("center");
  g.side = positive(n.number("side"), n.path() + ".side");
  g.beta = n.number("beta");
  if (!(g.beta > 0.0 && g.beta < 1.0)) {
    fail(n.path() + ".beta", "expected a volume fraction in (0, 1)");
  }
  return g;
}

CloudSource parse_cloud(const Node& n) {
  n.expect_object({"voids", "grid", "table1"});
  const int count = int(n.has("voids")) + int(n.has("grid")) + int(n.has("table1"));
  if (count != 1) {
    fail(n.path(), "exactly one of \"voids\", \"grid\" or \"table1\" must be given");
  }
  if (n.has("voids")) {
    return cloud_from_json(n.at("voids").raw(), n.path() + ".voids").voids();
  }
  if (n.has("grid")) {
    return parse_grid(n.at("grid"));
  }
  if (!n.at("table1").raw().is_boolean() || !n.at("table1").raw().get<bool>()) {
    fail(n.path() + ".table1", "expected true");
  }
  return Table1Cloud{};
}

SliceSpec parse_slice(const Node& n) {
  n.expect_object({"axis", "value", "lo", "hi", "resolution"});
  SliceSpec s;
  const long long axis = n.integer_or("axis", 2);
  if (axis < 0 || axis > 2) {
    fail(n.path() + ".axis", "expected 0, 1 or 2");
  }
  s.axis = static_cast<int>(axis);
  s.value = n.number_or("value", 0.0);
  s.lo = n.array<2, double>("lo");
  s.hi = n.array<2, double>("hi");
  if (n.has("resolution")) {
    s.resolution = n.array<2, std::size_t>("resolution");
  }
  return s;
}

OutputConfig parse_outputs(const Node& n) {
  n.expect_object({"line", "grid", "slice"});
  OutputConfig out;
  if (n.has("line")) {
    const Node l = n.at("line");
    l.expect_object({"p0", "p1", "n"});
    const long long count = l.integer("n");
    if (count < 2) {
      fail(l.path() + ".n", "expected an integer >= 2");
    }
    out.line = LineOutput{l.vec3("p0"), l.vec3("p1"), static_cast<std::size_t>(count)};
  }
  if (n.has("grid")) {
    const Node g = n.at("grid");
    g.expect_object({"lo", "hi", "resolution"});
    GridSpec spec;
    spec.box.lo = g.vec3("lo");
    spec.box.hi = g.vec3("hi");
    spec.resolution = g.array<3, std::size_t>("resolution");
    out.grid = spec;
  }
  if (n.has("slice")) {
    out.slice = parse_slice(n.at("slice"));
  }
  return out;
}

MfsConfig parse_mfs(const Node& n) {
  n.expect_object({"sources_per_void", "source_depth", "collocation_per_void", "max_residual", "truncation"});
  MfsConfig m;
  const long long src = n.integer_or("sources_per_void", static_cast<long long>(m.sources_per_void));
  if (src < 1) {
    fail(n.path() + ".sources_per_void", "expected a positive integer");
  }
  m.sources_per_void = static_cast<std::size_t>(src);
  m.source_depth = n.number_or("source_depth", m.source_depth);
  if (!(m.source_depth > 0.0 && m.source_depth < 1.0)) {
    fail(n.path() + ".source_depth", "expected a value in (0, 1)");
  }
  const long long col = n.integer_or("collocation_per_void", 0);
  if (col != 0 && col < src) {
    fail(n.path() + ".collocation_per_void", "must be >= sources_per_void");
  }
  m.collocation_per_void = static_cast<std::size_t>(col);
  m.max_residual = positive(n.number_or("max_residual", m.max_residual), n.path() + ".max_residual");
  m.truncation = positive(n.number_or("truncation", m.truncation), n.path() + ".truncation");
  return m;
}

CompareConfig parse_compare(const Node& n) {
  n.expect_object({"threshold", "margin_factor", "plane", "mfs", "radius_scales"});
  CompareConfig c;
  c.threshold = positive(n.number_or("threshold", c.threshold), n.path() + ".threshold");
  c.margin_factor = n.number_or("margin_factor", c.margin_factor);
  if (!(c.margin_factor >= 0.0)) {
    fail(n.path() + ".margin_factor", "expected a non-negative number");
  }
  if (n.has("plane")) {
    c.plane = parse_slice(n.at("plane"));
  }
  if (n.has("mfs")) {
    c.mfs = parse_mfs(n.at("mfs"));
  }
  if (n.has("radius_scales")) {
    const Node s = n.at("radius_scales");
    if (!s.raw().is_array() || s.raw().size() < 2) {
      fail(s.path(), "expected an array of at least two positive numbers");
    }
    for (std::size_t i = 0; i < s.raw().size(); ++i) {
      const json& e = s.raw()[i];
      if (!e.is_number() || !(e.get<double>() > 0.0)) {
        fail(s.path() + "[" + std::to_string(i) + "]", "expected a positive number");
      }
      c.radius_scales.push_back(e.get<double>());
    }
  }
  return c;
}

SolverConfig parse_solver(const Node& n) {
  n.expect_object({"method", "tol", "max_iter", "matrix_free_threshold"});
  SolverConfig s;
  if (n.has("method")) {
    const std::string m = n.string("method");
    if (m == "direct") {
      s.method = SolverMethod::Direct;
    } else if (m == "fixed_point") {
      s.method = SolverMethod::FixedPoint;
    } else {
      fail(n.path() + ".method", "expected \"direct\" or \"fixed_point\"");
    }
  }
  s.tol = positive(n.number_or("tol", s.tol), n.path() + ".tol");
  const long long it = n.integer_or("max_iter", s.max_iter);
  if (it < 1) {
    fail(n.path() + ".max_iter", "expected a positive integer");
  }
  s.max_iter = static_cast<int>(it);
  const long long thr = n.integer_or("matrix_free_threshold", static_cast<long long>(s.matrix_free_threshold));
  if (thr < 0) {
    fail(n.path() + ".matrix_free_threshold", "expected a non-negative integer");
  }
  s.matrix_free_threshold = static_cast<std::size_t>(thr);
  return s;
}

DiagnosticsOptions parse_diagnostics(const Node& n) {
  n.expect_object({"quadrature", "midpoint_cells", "monte_carlo_samples", "seed"});
  DiagnosticsOptions d;
  if (n.has("quadrature")) {
    const std::string q = n.string("quadrature");
    if (q == "auto") {
      d.quadrature = GradNormQuadrature::Auto;
    } else if (q == "midpoint") {
      d.quadrature = GradNormQuadrature::Midpoint;
    } else if (q == "monte_carlo") {
      d.quadrature = GradNormQuadrature::MonteCarlo;
    } else {
      fail(n.path() + ".quadrature", "expected \"auto\", \"midpoint\" or \"monte_carlo\"");
    }
  }
  const long long cells = n.integer_or("midpoint_cells", d.midpoint_cells);
  if (cells < 1) {
    fail(n.path() + ".midpoint_cells", "expected a positive integer");
  }
  d.midpoint_cells = static_cast<int>(cells);
  const long long samples = n.integer_or("monte_carlo_samples", static_cast<long long>(d.monte_carlo_samples));
  if (samples < 1) {
    fail(n.path() + ".monte_carlo_samples", "expected a positive integer");
  }
  d.monte_carlo_samples = static_cast<std::size_t>(samples);
  d.seed = static_cast<std::uint64_t>(n.integer_or("seed", static_cast<long long>(d.seed)));
  return d;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  const Node root(j, "$");
  root.expect_object({"domain", "source", "background", "cloud", "solver", "outputs", "compare",
                      "validation", "diagnostics"});
  RunConfig cfg;
  cfg.cloud = parse_cloud(root.at("cloud"));
  const bool table1 = std::holds_alternative<Table1Cloud>(cfg.cloud);

  if (root.has("domain")) {
    cfg.domain = parse_domain(root.at("domain"));
    if (table1 && !(cfg.domain.is_ball() && cfg.domain.radius() == 120.0)) {
      fail("$.domain", "the table1 cloud is defined in a ball of radius 120");
    }
  } else if (table1) {
    cfg.domain = DomainSpec::ball(120.0);
  } else {
    fail("$.domain", "missing required field");
  }

  if (root.has("source") && root.has("background")) {
    fail("$", "\"source\" and \"background\" are mutually exclusive");
  }
  if (root.has("source")) {
    const Node s = root.at("source");
    s.expect_object({"rho", "amplitude"});
    SourceSpec src;
    src.rho = positive(s.number("rho"), s.path() + ".rho");
    src.amplitude = s.number_or("amplitude", 6.0);
    if (cfg.domain.is_ball() && !(src.rho < cfg.domain.radius())) {
      fail(s.path() + ".rho", "source radius must be smaller than the ball radius");
    }
    cfg.background = src;
  } else if (root.has("background")) {
    const Node b = root.at("background");
    b.expect_object({"gradient"});
    if (cfg.domain.is_ball()) {
      fail(b.path(), "a uniform-gradient background is only defined in free space");
    }
    cfg.background = UniformGradient{b.vec3("gradient")};
  } else if (table1) {
    cfg.background = SourceSpec{30.0, 6.0};
  } else {
    fail("$.source", "missing required field (or give \"background\")");
  }

  if (root.has("solver")) {
    cfg.solver = parse_solver(root.at("solver"));
  }
  if (root.has("outputs")) {
    cfg.outputs = parse_outputs(root.at("outputs"));
  }
  if (root.has("compare")) {
    cfg.compare = parse_compare(root.at("compare"));
  }
  if (root.has("validation")) {
    const Node v = root.at("validation");
    v.expect_object({"mesoscale_c"});
    cfg.mesoscale_c = positive(v.number_or("mesoscale_c", 1.0), v.path() + ".mesoscale_c");
  }
  if (root.has("diagnostics")) {
    cfg.diagnostics = parse_diagnostics(root.at("diagnostics"));
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::ConfigError, "cannot open config file " + path.string());
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.domain = cfg.domain;
  p.background = cfg.background;
  if (const auto* voids = std::get_if<std::vector<Void>>(&cfg.cloud)) {
    p.cloud = Cloud(*voids);
  } else if (const auto* grid = std::get_if<CloudGridSpec>(&cfg.cloud)) {
    p.cloud = make_grid_cloud(*grid);
  } else {
    p.cloud = make_table1_cloud().first;
  }
  return p;
}

SliceSpec default_compare_plane(const Problem& problem) {
  SliceSpec s;
  s.axis = 2;
  s.value = 0.0;
  s.resolution = {41, 41};
  if (problem.domain.is_ball()) {
    const double R = problem.domain.radius();
    s.lo = {-R, -R};
    s.hi = {R, R};
  } else {
    const Box& b = problem.cloud.omega_bounds();
    s.lo = {b.lo.x(), b.lo.y()};
    s.hi = {b.hi.x(), b.hi.y()};
  }
  return s;
}

Cloud scale_radii(const Cloud& cloud, double factor) {
  std::vector<Void> voids;
  voids.reserve(cloud.size());
  for (const auto& v : cloud.voids()) {
    voids.emplace_back(v.center(), v.radius() * factor);
  }
  return Cloud(std::move(voids));
}

}  // namespace mesocloud
