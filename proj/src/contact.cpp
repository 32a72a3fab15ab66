#include "hybridctl/contact.hpp"

#include <stdexcept>

#include "hybridctl/so3.hpp"

namespace hybridctl {

void WrenchBases::validate() const {
  if (n_c < 1 || n_c > 6) throw std::invalid_argument("bases: n_c out of range");
  if (B_c.rows() != 6 || B_c.cols() != n_c || B_u.rows() != 6 ||
      B_u.cols() != 6 - n_c) {
    throw std::invalid_argument("bases: dimension mismatch");
  }
  MatrixXd Q(6, 6);
  Q << B_c, B_u;
  if ((Q.transpose() * Q - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() >
      1e-12) {
    throw std::invalid_argument("bases: [B_c | B_u] not orthogonal");
  }
}

WrenchBases make_single_axis_bases(int axis, double sign) {
  if (axis < 0 || axis > 2) {
    throw std::invalid_argument("bases: axis must be 0, 1 or 2");
  }
  WrenchBases b;
  b.n_c = 1;
  b.B_c = MatrixXd::Zero(6, 1);
  b.B_c(axis, 0) = sign >= 0 ? 1.0 : -1.0;
  b.B_u = MatrixXd::Zero(6, 5);
  int c = 0;
  for (int i = 0; i < 3; ++i) {
    if (i == axis) continue;
    b.B_u(i, c++) = 1.0;
  }
  for (int i = 3; i < 6; ++i) b.B_u(i, c++) = 1.0;
  b.validate();
  return b;
}

Matrix6d adjoint_blockdiag(const Matrix3d& R_E) {
  if (!is_rotation(R_E)) {
    throw std::invalid_argument("adjoint: input is not a rotation");
  }
  Matrix6d A = Matrix6d::Zero();
  A.topLeftCorner<3, 3>() = R_E;
  A.bottomRightCorner<3, 3>() = R_E;
  return A;
}

std::pair<MatrixXd, MatrixXd> contact_maps(const WrenchBases& bases,
                                           const Matrix3d& R_E) {
  const Matrix6d Ad = adjoint_blockdiag(R_E);
  return {Ad * bases.B_c, Ad * bases.B_u};
}

ConstrainedJacobians constrained_jacobians(const Matrix6Xd& J,
                                           const Matrix6Xd& J_dot,
                                           const WrenchBases& bases,
                                           const Matrix3d& R_E,
                                           const Vector3d& omega_E) {
  const auto [G, G_u] = contact_maps(bases, R_E);
  // Rdot = S(omega) R applied to both diagonal blocks.
  Matrix6d Ad_dot = Matrix6d::Zero();
  const Matrix3d Rd = skew(omega_E) * R_E;
  Ad_dot.topLeftCorner<3, 3>() = Rd;
  Ad_dot.bottomRightCorner<3, 3>() = Rd;
  const MatrixXd G_dot = Ad_dot * bases.B_c;
  const MatrixXd G_u_dot = Ad_dot * bases.B_u;

  ConstrainedJacobians out;
  out.J_c = G.transpose() * J;
  out.J_u = G_u.transpose() * J;
  out.J_c_dot = G_dot.transpose() * J + G.transpose() * J_dot;
  out.J_u_dot = G_u_dot.transpose() * J + G_u.transpose() * J_dot;
  return out;
}

MatrixXd friction_cone_rows(int n_c, double mu) {
  if (n_c == 1) {
    MatrixXd C(1, 1);
    C(0, 0) = -1.0;
    return C;
  }
  if (n_c == 3) {
    // f = (f_n, f_t1, f_t2): pyramid |f_ti| <= mu f_n.
    MatrixXd C(4, 3);
    C << -mu, 1, 0,
         -mu, -1, 0,
         -mu, 0, 1,
         -mu, 0, -1;
    return C;
  }
  throw std::invalid_argument("friction cone: unsupported n_c");
}

ContactSpec make_contact_spec(const WrenchBases& bases, const Matrix6Xd& J,
                              const Matrix6Xd& J_dot, const Matrix3d& R_E,
                              const Vector3d& omega_E,
                              const TangentialFrictionModel& f_u_model,
                              double mu) {
  ContactSpec spec;
  spec.bases = bases;
  auto maps = contact_maps(bases, R_E);
  spec.G = maps.first;
  spec.G_u = maps.second;
  auto jc = constrained_jacobians(J, J_dot, bases, R_E, omega_E);
  spec.J_c = jc.J_c;
  spec.J_u = jc.J_u;
  spec.J_c_dot = jc.J_c_dot;
  spec.J_u_dot = jc.J_u_dot;
  spec.friction_C = friction_cone_rows(bases.n_c, mu);
  spec.f_u_model = f_u_model;
  // Linear free directions: columns of B_u with support in the force rows.
  spec.dim_u_lin = 0;
  for (int c = 0; c < spec.bases.B_u.cols(); ++c) {
    if (spec.bases.B_u.col(c).head<3>().cwiseAbs().maxCoeff() > 0.5) {
      ++spec.dim_u_lin;
    }
  }
  return spec;
}

VectorXd tangential_friction(const ContactSpec& spec, const VectorXd& qdot) {
  const VectorXd v_u = spec.J_u * qdot;
  VectorXd f_u = VectorXd::Zero(v_u.size());
  f_u.head(spec.dim_u_lin) = -spec.f_u_model.k_viscous * v_u.head(spec.dim_u_lin);
  return f_u;
}

}  // namespace hybridctl
