#pragma once

#include <Eigen/Dense>

namespace hybridctl {

using Eigen::Matrix3d;
using Eigen::Vector3d;

// S(x) such that S(x)*y = x cross y.
Matrix3d skew(const Vector3d& x);

// Inverse of skew. Throws std::invalid_argument if S is not antisymmetric
// within 1e-9.
Vector3d vee(const Matrix3d& S);

// Axis-angle logarithm, defined for rotation angle < pi; the angle == pi
// branch extracts the axis from the symmetric part.
Vector3d log_so3(const Matrix3d& R);

// Rodrigues formula.
Matrix3d exp_so3(const Vector3d& omega_theta);

// e_R = 1/2 (R^T R_d - R_d^T R)^vee
Vector3d rotation_error(const Matrix3d& R_E, const Matrix3d& R_E_d);

bool is_rotation(const Matrix3d& R, double tol = 1e-9);

}  // namespace hybridctl
