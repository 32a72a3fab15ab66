#include "hybridctl/so3.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridctl {

Matrix3d skew(const Vector3d& x) {
  Matrix3d S;
  S << 0, -x.z(), x.y(), x.z(), 0, -x.x(), -x.y(), x.x(), 0;
  return S;
}

Vector3d vee(const Matrix3d& S) {
  if ((S + S.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("vee: matrix is not antisymmetric");
  }
  return {S(2, 1), S(0, 2), S(1, 0)};
}

Vector3d log_so3(const Matrix3d& R) {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(c);
  if (theta < 1e-12) {
    // First-order: R ~ I + S(w).
    return 0.5 * Vector3d(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                          R(1, 0) - R(0, 1));
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the antisymmetric part vanishes; take the axis from
    // R + I = 2 a a^T (angle pi exactly).
    const Matrix3d B = 0.5 * (R + Matrix3d::Identity());
    int k;
    B.diagonal().maxCoeff(&k);
    Vector3d axis = B.col(k) / std::sqrt(B(k, k));
    axis.normalize();
    // Fix the sign convention from the antisymmetric remainder when nonzero.
    const Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    if (w.dot(axis) < 0) axis = -axis;
    return theta * axis;
  }
  const Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  return theta / (2.0 * std::sin(theta)) * w;
}

Matrix3d exp_so3(const Vector3d& omega_theta) {
  const double theta = omega_theta.norm();
  if (theta < 1e-12) {
    return Matrix3d::Identity() + skew(omega_theta);
  }
  const Vector3d a = omega_theta / theta;
  const Matrix3d S = skew(a);
  return Matrix3d::Identity() + std::sin(theta) * S +
         (1.0 - std::cos(theta)) * S * S;
}

Vector3d rotation_error(const Matrix3d& R_E, const Matrix3d& R_E_d) {
  const Matrix3d A = R_E.transpose() * R_E_d - R_E_d.transpose() * R_E;
  return 0.5 * Vector3d(A(2, 1), A(0, 2), A(1, 0));
}

bool is_rotation(const Matrix3d& R, double tol) {
  return (R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff() <
             tol &&
         std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace hybridctl
