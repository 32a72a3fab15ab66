#pragma once

#include "hybridctl/dynamics.hpp"

namespace hybridctl {

using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Orthonormal split of the end-effector wrench space into constrained
// (B_c, n_c columns) and free (B_u) directions, body frame.
struct WrenchBases {
  MatrixXd B_c;  // 6 x n_c
  MatrixXd B_u;  // 6 x (6 - n_c)
  int n_c = 1;

  // Throws if [B_c | B_u] is not orthogonal within 1e-12 or n_c out of range.
  void validate() const;
};

// Single-direction basis along a body linear axis (0=x, 1=y, 2=z); `sign`
// flips the constrained direction so that compression is positive.
WrenchBases make_single_axis_bases(int axis, double sign = 1.0);

struct TangentialFrictionModel {
  double k_viscous = 5.0;  // N s/m, applied to the linear free directions
};

struct ContactSpec {
  WrenchBases bases;
  MatrixXd G;        // 6 x n_c
  MatrixXd G_u;      // 6 x (6 - n_c)
  MatrixXd J_c;      // n_c x n
  MatrixXd J_u;      // (6 - n_c) x n
  MatrixXd J_c_dot;
  MatrixXd J_u_dot;
  MatrixXd friction_C;  // m_f x n_c
  TangentialFrictionModel f_u_model;
  int dim_u_lin = 2;  // linear rows of the free split

  int n_c() const { return bases.n_c; }
};

// blkdiag(R_E, R_E); throws on non-orthogonal input.
Matrix6d adjoint_blockdiag(const Matrix3d& R_E);

// G = blkdiag(R_E, R_E) B_c and likewise G_u.
std::pair<MatrixXd, MatrixXd> contact_maps(const WrenchBases& bases,
                                           const Matrix3d& R_E);

struct ConstrainedJacobians {
  MatrixXd J_c, J_u, J_c_dot, J_u_dot;
};

// J_c = G^T J, J_u = G_u^T J and their time derivatives with
// Gdot = blkdiag(S(omega_E) R_E, .) B_c.
ConstrainedJacobians constrained_jacobians(const Matrix6Xd& J,
                                           const Matrix6Xd& J_dot,
                                           const WrenchBases& bases,
                                           const Matrix3d& R_E,
                                           const Vector3d& omega_E);

// Linearized friction cone rows C with C f_c <= 0. n_c = 1: unilateral
// C = [-1]. n_c = 3 (normal-first ordering): 4-facet pyramid with
// coefficient mu. Other n_c -> std::invalid_argument.
MatrixXd friction_cone_rows(int n_c, double mu = 0.5);

// Assembles the full spec at a state.
ContactSpec make_contact_spec(const WrenchBases& bases, const Matrix6Xd& J,
                              const Matrix6Xd& J_dot, const Matrix3d& R_E,
                              const Vector3d& omega_E,
                              const TangentialFrictionModel& f_u_model,
                              double mu = 0.5);

// Viscous tangential friction in the free coordinates: -k_v on the linear
// rows of v_u, zero on the angular rows.
VectorXd tangential_friction(const ContactSpec& spec, const VectorXd& qdot);

}  // namespace hybridctl
