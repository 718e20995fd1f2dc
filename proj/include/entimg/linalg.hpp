#pragma once

#include <complex>

#include <Eigen/Dense>

namespace entimg {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

} // namespace entimg
