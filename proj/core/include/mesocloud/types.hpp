#pragma once

#include <Eigen/Core>

namespace mesocloud {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Relative threshold below which two points are treated as coincident.
inline constexpr double kCoincidenceTol = 1e-12;

/// Relative slack for points that sit on a void surface up to rounding.
inline constexpr double kSurfaceTol = 1e-12;

}  // namespace mesocloud
