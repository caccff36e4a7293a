#pragma once

#include <Eigen/Dense>

namespace rendopt {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Dimensional relative orbital elements a*(da, dl, dex, dey, dix, diy), meters.
using RoeState = Vec6;
/// RTN relative position [m] and rotating-frame relative velocity [m/s].
using RtnState = Vec6;
/// Impulsive delta-v in the RTN frame [m/s].
using ControlImpulse = Vec3;

}  // namespace rendopt
