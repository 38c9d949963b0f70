#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef MESOCLOUD_HAVE_OPENMP
#include <omp.h>
#endif

#include "mesocloud/assembly.hpp"
#include "mesocloud/config.hpp"
#include "mesocloud/error.hpp"
#include "mesocloud/field.hpp"
#include "mesocloud/geometry.hpp"
#include "mesocloud/io.hpp"
#include "mesocloud/oracle.hpp"

#ifndef MESOCLOUD_VERSION
#define MESOCLOUD_VERSION "0.0.0"
#endif

namespace mesocloud::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string config;
  std::string out = ".";
  int threads = 0;
  int m = 10;
  bool m_given = false;
};

class Log {
 public:
  explicit Log(std::ostream& os) : os_(os) {}
  void info(const std::string& msg) { os_ << "[mesocloud] " << msg << '\n'; }
  void error(const std::string& msg) { os_ << "[mesocloud] error: " << msg << '\n'; }

 private:
  std::ostream& os_;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularSystem:
    case ErrorCode::NotConverged:
      return kSolverFailure;
    case ErrorCode::OracleNotConverged:
      return kOracleFailure;
    default:
      return kAdmissibilityError;
  }
}

/// Creates the output directory and proves it writable before any compute.
void prepare_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw Error(ErrorCode::ConfigError, "cannot create output directory " + out.string() + ": " + ec.message());
  }
  const fs::path probe = out / ".mesocloud_write_probe";
  try {
    write_file_atomic(probe, "");
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "output directory " + out.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, dump_json(j)); }

/// RFC 4180 CSV of plain numeric columns; empty cells stand for non-finite values.
std::string numeric_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) {
    s += (c ? "," : "") + header[c];
  }
  s += "\r\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += ',';
      s += format_double(row[c]);
    }
    s += "\r\n";
  }
  return s;
}

DipoleSolution run_solver(const Problem& problem, const RunConfig& cfg, Log& log) {
  AssemblyOptions opts;
  opts.matrix_free_threshold = cfg.solver.matrix_free_threshold;
  const auto t0 = std::chrono::steady_clock::now();
  const InteractionSystem sys = assemble(problem, opts);
  DipoleSolution sol = cfg.solver.method == SolverMethod::Direct
                           ? solve_direct(sys, cfg.diagnostics)
                           : solve_fixed_point(sys, cfg.solver.tol, cfg.solver.max_iter, cfg.diagnostics);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  os << "solved " << problem.cloud.size() << " voids (" << sol.method << ") in " << std::setprecision(3) << secs
     << " s, residual " << sol.residual_norm;
  log.info(os.str());
  return sol;
}

/// Returns false (after logging) when the cloud has error-severity violations.
bool check_admissible(const Problem& problem, const RunConfig& cfg, const fs::path& out, Log& log) {
  const ValidationReport report = validate_cloud(problem.cloud, problem.domain, cfg.mesoscale_c);
  write_json(out / "validation.json", to_json(report));
  for (const auto& v : report.violations) {
    if (v.severity == Severity::Error) {
      log.error(v.message);
    } else {
      log.info("warning: " + v.message);
    }
  }
  return report.admissible();
}

json diagnostics_json(const Problem& problem, const DipoleSolution& sol) {
  json j;
  j["diagnostics"] = to_json(diagnostics_report(sol, problem.cloud));
  // The void-surface residual costs O(N^2) kernel evaluations per sample point.
  constexpr std::size_t kBoundaryCheckMaxVoids = 200;
  if (problem.cloud.size() <= kBoundaryCheckMaxVoids) {
    j["boundary"] = to_json(boundary_residuals(problem, sol, 200));
  } else {
    j["boundary"] = nullptr;
  }
  return j;
}

int cmd_validate(const Options& o, Log& log) {
  const RunConfig cfg = load_run_config(o.config);
  const Problem problem = build_problem(cfg);
  if (!check_admissible(problem, cfg, o.out, log)) {
    return kAdmissibilityError;
  }
  log.info("configuration admissible (" + std::to_string(problem.cloud.size()) + " voids)");
  return kSuccess;
}

int cmd_solve(const Options& o, Log& log) {
  const RunConfig cfg = load_run_config(o.config);
  const Problem problem = build_problem(cfg);
  if (!check_admissible(problem, cfg, o.out, log)) {
    return kAdmissibilityError;
  }
  const DipoleSolution sol = run_solver(problem, cfg, log);
  const fs::path out(o.out);
  write_json(out / "cloud.json", to_json(problem.cloud));
  write_json(out / "solution.json", to_json(sol));
  write_json(out / "diagnostics.json", diagnostics_json(problem, sol));
  if (cfg.outputs.line) {
    const LineOutput& l = *cfg.outputs.line;
    write_file_atomic(out / "line.csv", to_csv(sample_line(l.p0, l.p1, l.n, problem, sol)));
  }
  if (cfg.outputs.grid) {
    write_file_atomic(out / "grid.csv", to_csv(sample_grid(*cfg.outputs.grid, problem, sol)));
  }
  if (cfg.outputs.slice) {
    write_file_atomic(out / "slice.csv", to_csv(sample_slice(*cfg.outputs.slice, problem, sol)));
  }
  return kSuccess;
}

RunConfig fig5_default_config() {
  RunConfig cfg;
  cfg.domain = DomainSpec::ball(7.0);
  cfg.background = SourceSpec{2.0, 6.0};
  cfg.cloud = CloudGridSpec{10, Vec3(3.0, 0.0, 0.0), 1.0 / std::sqrt(3.0), std::numbers::pi / 25.0};
  const double y = -1.0 / (2.0 * std::sqrt(3.0));
  cfg.outputs.line = LineOutput{Vec3(2.0, y, y), Vec3(4.0, y, y), 1000};
  return cfg;
}

int cmd_reproduce_fig5(const Options& o, Log& log) {
  RunConfig cfg = o.config.empty() ? fig5_default_config() : load_run_config(o.config);
  auto* grid = std::get_if<CloudGridSpec>(&cfg.cloud);
  if (grid == nullptr) {
    throw Error(ErrorCode::ConfigError, "cloud: reproduce-fig5 requires a grid cloud");
  }
  if (o.m_given) {
    grid->m = o.m;
  }
  if (grid->m < 2 || grid->m > 10) {
    throw Error(ErrorCode::ConfigError, "cloud.grid.m: reproduce-fig5 requires 2 <= m <= 10");
  }
  if (!cfg.outputs.line) {
    cfg.outputs.line = fig5_default_config().outputs.line;
  }
  const double alpha = alpha_for(grid->m, grid->beta);
  const double alpha_inf = alpha_infinity(grid->beta);
  {
    std::ostringstream os;
    os << std::setprecision(17) << "m = " << grid->m << ", beta = " << grid->beta << ", alpha = " << alpha
       << ", alpha_infinity = " << alpha_inf;
    log.info(os.str());
  }
  log.info("unvalidated against oracle: no reference solution is computed at this size");

  const Problem problem = build_problem(cfg);
  if (!check_admissible(problem, cfg, o.out, log)) {
    return kAdmissibilityError;
  }
  const DipoleSolution sol = run_solver(problem, cfg, log);
  const LineOutput& l = *cfg.outputs.line;
  const FieldSamples s = sample_line(l.p0, l.p1, l.n, problem, sol);
  std::vector<std::vector<double>> rows;
  rows.reserve(s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    rows.push_back({s.points[i].x(), s.correction[i]});
  }
  const fs::path out(o.out);
  const std::string stem = "fig5_m" + std::to_string(grid->m);
  write_file_atomic(out / (stem + ".csv"), numeric_csv({"x1", "correction"}, rows));
  json summary = diagnostics_json(problem, sol);
  summary["m"] = grid->m;
  summary["n_voids"] = problem.cloud.size();
  summary["alpha"] = alpha;
  summary["alpha_infinity"] = alpha_inf;
  summary["beta"] = grid->beta;
  summary["status"] = "unvalidated against oracle";
  write_json(out / (stem + ".json"), summary);
  return kSuccess;
}

/// Least-squares slope of log(err) against log(scale).
double fit_order(const std::vector<double>& scales, const std::vector<double>& errors) {
  const std::size_t n = scales.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(scales[i]);
    my += std::log(errors[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(scales[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::string describe(const ErrorReport& r) {
  std::ostringstream os;
  os << std::setprecision(4) << "max_rel " << r.max_rel << ", l2_rel " << r.l2_rel << " over " << r.n_points
     << " points (oracle residual " << r.oracle_residual << ")";
  return os.str();
}

struct CompareRun {
  DipoleSolution sol;
  ErrorReport report;
};

CompareRun compare_once(const Problem& problem, const RunConfig& cfg, const std::vector<Vec3>& points, Log& log) {
  CompareRun run;
  run.sol = run_solver(problem, cfg, log);
  const ReferenceSolution ref = solve_reference(problem, cfg.compare.mfs);
  run.report = compare(problem, run.sol, ref, points);
  log.info(describe(run.report));
  return run;
}

std::vector<Vec3> evaluation_points(const Problem& problem, const RunConfig& cfg) {
  const SliceSpec plane = cfg.compare.plane.value_or(default_compare_plane(problem));
  std::vector<Vec3> pts = bulk_points(slice_points(plane), problem, cfg.compare.margin_factor);
  if (pts.empty()) {
    throw Error(ErrorCode::ConfigError, "compare.plane: no evaluation points remain in the bulk");
  }
  return pts;
}

int run_compare(const RunConfig& cfg, const fs::path& out, Log& log) {
  const Problem problem = build_problem(cfg);
  if (!check_admissible(problem, cfg, out, log)) {
    return kAdmissibilityError;
  }
  if (cfg.compare.radius_scales.empty()) {
    const CompareRun run = compare_once(problem, cfg, evaluation_points(problem, cfg), log);
    write_json(out / "solution.json", to_json(run.sol));
    write_json(out / "error_report.json", to_json(run.report));
    write_file_atomic(out / "pointwise.csv", pointwise_csv(run.report));
    return run.report.max_rel <= cfg.compare.threshold ? kSuccess : kThresholdExceeded;
  }

  // Every scale is measured on the same points: the bulk of the largest voids.
  const std::vector<double>& scales = cfg.compare.radius_scales;
  const double largest = *std::max_element(scales.begin(), scales.end());
  Problem widest = problem;
  widest.cloud = scale_radii(problem.cloud, largest);
  const std::vector<Vec3> points = evaluation_points(widest, cfg);

  std::vector<double> errors;
  std::vector<std::vector<double>> rows;
  json runs = json::array();
  ErrorReport widest_report;
  bool within = true;
  for (const double s : scales) {
    Problem scaled = problem;
    scaled.cloud = scale_radii(problem.cloud, s);
    if (!validate_cloud(scaled.cloud, scaled.domain, cfg.mesoscale_c).admissible()) {
      throw Error(ErrorCode::InvalidArgument, "compare.radius_scales: scale " + format_double(s) +
                                                  " produces an inadmissible cloud");
    }
    log.info("radius scale " + format_double(s));
    const CompareRun run = compare_once(scaled, cfg, points, log);
    errors.push_back(run.report.max_rel);
    rows.push_back({s, run.report.max_rel, run.report.l2_rel, run.report.max_abs, double(run.report.n_points),
                    run.report.oracle_residual});
    json entry = to_json(run.report);
    entry["scale"] = s;
    runs.push_back(entry);
    within = within && run.report.max_rel <= cfg.compare.threshold;
    if (s == largest) {
      widest_report = run.report;
    }
  }
  json convergence;
  convergence["runs"] = runs;
  if (scales.size() >= 2) {
    const double order = fit_order(scales, errors);
    convergence["order"] = order;
    log.info("fitted order " + format_double(order));
  } else {
    convergence["order"] = nullptr;
  }
  write_file_atomic(out / "convergence.csv",
                    numeric_csv({"scale", "max_rel", "l2_rel", "max_abs", "n_points", "oracle_residual"}, rows));
  write_json(out / "convergence.json", convergence);
  write_json(out / "error_report.json", to_json(widest_report));
  write_file_atomic(out / "pointwise.csv", pointwise_csv(widest_report));
  return within ? kSuccess : kThresholdExceeded;
}

int cmd_compare_oracle(const Options& o, Log& log) { return run_compare(load_run_config(o.config), o.out, log); }

RunConfig table1_default_config() {
  RunConfig cfg;
  cfg.domain = make_table1_cloud().second;
  cfg.background = SourceSpec{30.0, 6.0};
  cfg.cloud = Table1Cloud{};
  cfg.compare.mfs.sources_per_void = 144;
  cfg.compare.mfs.source_depth = 0.25;
  return cfg;
}

int cmd_reproduce_table1(const Options& o, Log& log) {
  const RunConfig cfg = o.config.empty() ? table1_default_config() : load_run_config(o.config);
  const Cloud cloud = build_problem(cfg).cloud;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Void& v = cloud.voids()[i];
    rows.push_back({double(i + 1), v.center().x(), v.center().y(), v.center().z(), v.radius()});
  }
  write_file_atomic(fs::path(o.out) / "table1_cloud.csv", numeric_csv({"void", "x", "y", "z", "radius"}, rows));
  return run_compare(cfg, o.out, log);
}

void write_run_metadata(const Options& o, const std::string& started, int code) {
  json meta;
  meta["command"] = o.command;
  meta["config"] = o.config;
  meta["exit_code"] = code;
  meta["started_utc"] = started;
  meta["finished_utc"] = utc_now();
  meta["threads"] = o.threads;
  meta["version"] = MESOCLOUD_VERSION;
  write_json(fs::path(o.out) / "run_metadata.json", meta);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& log_stream) {
  Log log(log_stream);
  Options o;
  CLI::App app{"Mesoscale dipole asymptotics for the Poisson equation in domains with many small voids",
               "mesocloud"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    bool config_required;
  };
  const Command commands[] = {
      {"solve", "Solve for the dipole coefficients and write the requested field samples", true},
      {"validate", "Check cloud admissibility without solving", true},
      {"reproduce-fig5", "Correction profile along the diagonal line through a grid cloud", false},
      {"reproduce-table1", "Eighteen-void cloud in a ball, compared with the reference solver", false},
      {"compare-oracle", "Compare the asymptotic field with the reference solver", true},
  };
  CLI::Option* m_option = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    CLI::Option* cfg = sub->add_option("config", o.config, "Run configuration (JSON)");
    if (c.config_required) {
      cfg->required();
    }
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (0 keeps the runtime default)")
        ->check(CLI::NonNegativeNumber);
    if (std::string(c.name) == "reproduce-fig5") {
      m_option = sub->add_option("--m", o.m, "Voids per cube edge (N = m^3)")->check(CLI::Range(2, 10));
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help;
    const int code = app.exit(e, help, help);
    log_stream << help.str();
    return code == 0 ? kSuccess : kAdmissibilityError;
  }
  for (const auto* sub : app.get_subcommands()) {
    o.command = sub->get_name();
  }
  o.m_given = m_option->count() > 0;

#ifdef MESOCLOUD_HAVE_OPENMP
  if (o.threads > 0) {
    omp_set_num_threads(o.threads);
  }
#endif

  const std::string started = utc_now();
  int code = kSuccess;
  try {
    prepare_out_dir(o.out);
  } catch (const Error& e) {
    log.error(e.what());
    return kAdmissibilityError;
  }
  try {
    if (o.command == "solve") {
      code = cmd_solve(o, log);
    } else if (o.command == "validate") {
      code = cmd_validate(o, log);
    } else if (o.command == "reproduce-fig5") {
      code = cmd_reproduce_fig5(o, log);
    } else if (o.command == "reproduce-table1") {
      code = cmd_reproduce_table1(o, log);
    } else {
      code = cmd_compare_oracle(o, log);
    }
  } catch (const Error& e) {
    log.error(e.what());
    code = exit_code_for(e.code());
  } catch (const std::exception& e) {
    log.error(e.what());
    code = kSolverFailure;
  }
  if (code == kThresholdExceeded) {
    log.error("relative error exceeds the configured threshold");
  }
  write_run_metadata(o, started, code);
  return code;
}

}  // namespace mesocloud::cli
