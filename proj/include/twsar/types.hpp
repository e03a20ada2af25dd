#pragma once

#include <complex>

#include <Eigen/Dense>

namespace twsar {

using cd = std::complex<double>;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using MatX3i = Eigen::Matrix<int, Eigen::Dynamic, 3>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double speed_of_light = 299792458.0;        // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m

inline constexpr cd imag_unit{0.0, 1.0};

}  // namespace twsar
