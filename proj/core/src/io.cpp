#include "mesocloud/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mesocloud/error.hpp"

namespace mesocloud {

std::string format_double(double x) {
  if (!std::isfinite(x)) {
    return {};
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json optional_json(const std::optional<double>& x) {
  return x ? json(*x) : json(nullptr);
}

Vec3 vec_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ConfigError, path + ": expected an array of three numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      throw Error(ErrorCode::ConfigError, path + "[" + std::to_string(i) + "]: expected a number");
    }
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

}  // namespace

json to_json(const Cloud& cloud) {
  json arr = json::array();
  for (const auto& v : cloud.voids()) {
    arr.push_back({{"center", vec_json(v.center())}, {"radius", v.radius()}});
  }
  return arr;
}

Cloud cloud_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw Error(ErrorCode::ConfigError, path + ": expected an array of voids");
  }
  std::vector<Void> voids;
  voids.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& item = j[i];
    if (!item.is_object() || !item.contains("center") || !item.contains("radius")) {
      throw Error(ErrorCode::ConfigError, p + ": expected {\"center\": [x, y, z], \"radius\": r}");
    }
    for (const auto& [key, _] : item.items()) {
      if (key != "center" && key != "radius") {
        throw Error(ErrorCode::ConfigError, p + "." + key + ": unknown field");
      }
    }
    if (!item["radius"].is_number() || !(item["radius"].get<double>() > 0.0)) {
      throw Error(ErrorCode::ConfigError, p + ".radius: expected a positive number");
    }
    voids.emplace_back(vec_from(item["center"], p + ".center"), item["radius"].get<double>());
  }
  return Cloud(std::move(voids));
}

json to_json(const DipoleSolution& sol) {
  json coeffs = json::array();
  for (const auto& c : sol.coeffs) {
    coeffs.push_back(vec_json(c));
  }
  return {
      {"coeffs", coeffs},
      {"residual_norm", sol.residual_norm},
      {"lambda_max", sol.lambda_max},
      {"lambda_min", sol.lambda_min},
      {"wellposed_ratio", sol.wellposed_ratio},
      {"coeff_bound_ratio", optional_json(sol.coeff_bound_ratio)},
      {"grad_v_norm_sq", sol.grad_v_norm_sq},
      {"method", sol.method},
      {"iterations", sol.iterations},
      {"rcond", optional_json(sol.rcond)},
  };
}

DipoleSolution solution_from_json(const json& j) {
  try {
    DipoleSolution sol;
    for (const auto& c : j.at("coeffs")) {
      sol.coeffs.push_back(vec_from(c, "coeffs[]"));
    }
    sol.residual_norm = j.at("residual_norm").get<double>();
    sol.lambda_max = j.at("lambda_max").get<double>();
    sol.lambda_min = j.value("lambda_min", 0.0);
    sol.wellposed_ratio = j.at("wellposed_ratio").get<double>();
    if (const auto& cb = j.at("coeff_bound_ratio"); !cb.is_null()) {
      sol.coeff_bound_ratio = cb.get<double>();
    }
    sol.grad_v_norm_sq = j.value("grad_v_norm_sq", 0.0);
    sol.method = j.value("method", std::string{});
    sol.iterations = j.value("iterations", 0);
    if (j.contains("rcond") && !j["rcond"].is_null()) {
      sol.rcond = j["rcond"].get<double>();
    }
    return sol;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("solution JSON: ") + e.what());
  }
}

json to_json(const Diagnostics& diag) {
  return {
      {"n_voids", diag.n_voids},
      {"eps", diag.eps},
      {"d", std::isfinite(diag.d) ? json(diag.d) : json(nullptr)},
      {"residual_norm", diag.residual_norm},
      {"lambda_max", diag.lambda_max},
      {"lambda_min", diag.lambda_min},
      {"wellposed_ratio", std::isfinite(diag.d) ? json(diag.wellposed_ratio) : json("not applicable")},
      {"coeff_bound_ratio",
       diag.coeff_bound_ratio ? json(*diag.coeff_bound_ratio) : json("not applicable")},
      {"a1_ratio", diag.a1_ratio},
      {"a2_ratio", diag.a2_ratio},
      {"method", diag.method},
      {"iterations", diag.iterations},
  };
}

json to_json(const ValidationReport& report) {
  json items = json::array();
  for (const auto& v : report.violations) {
    items.push_back({{"kind", std::string(to_string(v.kind))},
                     {"severity", std::string(to_string(v.severity))},
                     {"first", v.first},
                     {"second", v.second},
                     {"message", v.message}});
  }
  return {{"admissible", report.admissible()}, {"violations", items}};
}

json to_json(const BoundaryReport& report) {
  json voids = json::array();
  for (const auto& v : report.voids) {
    voids.push_back({{"max_abs", v.max_abs}, {"l2", v.l2}});
  }
  return {{"voids", voids},
          {"max_void_flux", report.max_void_flux},
          {"outer_max_abs", optional_json(report.outer_max_abs)}};
}

json to_json(const ErrorReport& report) {
  return {{"max_rel", report.max_rel},
          {"l2_rel", report.l2_rel},
          {"max_abs", report.max_abs},
          {"n_points", report.n_points},
          {"oracle_residual", report.oracle_residual}};
}

json to_json(const FieldSamples& samples) {
  json rows = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const bool masked = samples.mask[i] != 0;
    const auto val = [&](double x) { return masked ? json(nullptr) : json(x); };
    rows.push_back({{"x", vec_json(samples.points[i])},
                    {"u_N", val(samples.u_N[i])},
                    {"v", val(samples.v[i])},
                    {"correction", val(samples.correction[i])},
                    {"mask", masked}});
  }
  return {{"columns", {"x", "y", "z", "u_N", "v", "correction", "mask"}}, {"samples", rows}};
}

std::string to_csv(const FieldSamples& samples) {
  std::string out = "x,y,z,u_N,v,correction,mask\r\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec3& p = samples.points[i];
    out += format_double(p.x()) + ',' + format_double(p.y()) + ',' + format_double(p.z()) + ',';
    if (samples.mask[i] != 0) {
      out += ",,,1\r\n";
    } else {
      out += format_double(samples.u_N[i]) + ',' + format_double(samples.v[i]) + ',' +
             format_double(samples.correction[i]) + ",0\r\n";
    }
  }
  return out;
}

std::string pointwise_csv(const ErrorReport& report) {
  std::string out = "x,y,z,approx,reference,abs_error\r\n";
  for (const auto& p : report.pointwise) {
    out += format_double(p.x.x()) + ',' + format_double(p.x.y()) + ',' + format_double(p.x.z()) + ',' +
           format_double(p.approx) + ',' + format_double(p.reference) + ',' +
           format_double(std::abs(p.approx - p.reference)) + "\r\n";
  }
  return out;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      throw Error(ErrorCode::InvalidArgument, "cannot open " + tmp.string() + " for writing");
    }
    os << content;
    if (!os.flush()) {
      throw Error(ErrorCode::InvalidArgument, "failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

}  // namespace mesocloud
