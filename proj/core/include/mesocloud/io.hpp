#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mesocloud/assembly.hpp"
#include "mesocloud/field.hpp"
#include "mesocloud/oracle.hpp"

namespace mesocloud {

using nlohmann::json;

/// %.17g, which round-trips every double. Non-finite values format as "".
std::string format_double(double x);

json to_json(const Cloud& cloud);
/// Parses [{"center": [x, y, z], "radius": r}, ...]; throws ConfigError with the offending path.
Cloud cloud_from_json(const json& j, const std::string& path = "voids");

json to_json(const DipoleSolution& sol);
DipoleSolution solution_from_json(const json& j);
json to_json(const Diagnostics& diag);
json to_json(const ValidationReport& report);
json to_json(const BoundaryReport& report);
/// {max_rel, l2_rel, n_points, oracle_residual, max_abs}; pointwise data goes to CSV.
json to_json(const ErrorReport& report);
json to_json(const FieldSamples& samples);

/// RFC 4180 CSV with header x,y,z,u_N,v,correction,mask. Masked rows leave the value cells empty.
std::string to_csv(const FieldSamples& samples);
/// x,y,z,approx,reference,abs_error.
std::string pointwise_csv(const ErrorReport& report);

/// Pretty-printed with sorted keys and a trailing newline.
std::string dump_json(const json& j);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mesocloud
