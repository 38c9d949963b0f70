#include "mesocloud/error.hpp"

namespace mesocloud {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveRadicand: return "NonPositiveRadicand";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::InsideVoid: return "InsideVoid";
    case ErrorCode::SourceOverlapsCloud: return "SourceOverlapsCloud";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::OracleNotConverged: return "OracleNotConverged";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace mesocloud
