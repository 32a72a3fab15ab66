#include "hybridctl/inner_loop.hpp"

#include <stdexcept>

namespace hybridctl {

VectorXd TaskWeights::expand(int n, int dim_u_lin, int n_c) const {
  if (w_q < 0 || w_pu < 0 || w_R < 0 || w_fc < 0 ||
      (w_q == 0 && w_pu == 0 && w_R == 0 && w_fc == 0)) {
    throw std::invalid_argument("weights: need nonnegative, at least one > 0");
  }
  VectorXd w(n + dim_u_lin + 3 + n_c);
  w.head(n).setConstant(w_q);
  w.segment(n, dim_u_lin).setConstant(w_pu);
  w.segment(n + dim_u_lin, 3).setConstant(w_R);
  w.tail(n_c).setConstant(w_fc);
  return w;
}

ControlBounds ControlBounds::defaults(int n, int n_c, double tau_max,
                                      double f_c_max) {
  ControlBounds b;
  b.u_lower.resize(n + n_c);
  b.u_upper.resize(n + n_c);
  b.u_lower.head(n).setConstant(-tau_max);
  b.u_upper.head(n).setConstant(tau_max);
  b.u_lower.tail(n_c).setConstant(0.0);
  b.u_upper.tail(n_c).setConstant(f_c_max);
  return b;
}

AffineSystem build_affine(const RobotModel& model, const JointState& state,
                          const ContactSpec& contact, const VectorXd& f_u) {
  const int n = model.n();
  const int n_c = contact.n_c();
  const int rows_u = 6 - n_c;
  if (f_u.size() != rows_u) {
    throw std::invalid_argument("build_affine: f_u dimension mismatch");
  }
  const MatrixXd M = mass_matrix(model, state.q);
  const VectorXd c = bias_forces(model, state);
  const VectorXd g = gravity_vector(model, state.q);
  const Eigen::LLT<MatrixXd> M_llt(M);

  AffineSystem aff;
  aff.Gamma = M_llt.solve(contact.J_u.transpose() * f_u - c - g);

  const MatrixXd Minv_block = M_llt.solve(
      (MatrixXd(n, n + n_c) << MatrixXd::Identity(n, n),
       contact.J_c.transpose())
          .finished());

  aff.A = MatrixXd::Zero(n + rows_u + n_c, n + n_c);
  aff.A.topRows(n) = Minv_block;
  aff.A.middleRows(n, rows_u) = contact.J_u * Minv_block;
  aff.A.bottomRightCorner(n_c, n_c).setIdentity();

  aff.b = VectorXd::Zero(n + rows_u + n_c);
  aff.b.head(n) = aff.Gamma;
  aff.b.segment(n, rows_u) =
      contact.J_u * aff.Gamma + contact.J_u_dot * state.qdot;
  return aff;
}

QPProblem build_inner_qp(const AffineSystem& aff, const VirtualInput& v_star,
                         const TaskWeights& W, const ControlBounds& bounds,
                         const ContactSpec& contact, const RobotModel& model,
                         const JointState& state,
                         bool paper_literal_constraint) {
  const int n = model.n();
  const int n_c = contact.n_c();
  const int d = n + n_c;
  if ((bounds.u_lower.array() > bounds.u_upper.array()).any()) {
    throw std::invalid_argument("bounds: lower exceeds upper");
  }
  const VectorXd w = W.expand(v_star.n, v_star.dim_u_lin, v_star.n_c);

  QPProblem qp;
  const MatrixXd WA = w.asDiagonal() * aff.A;
  qp.P_c = aff.A.transpose() * WA;
  qp.P_c = 0.5 * (qp.P_c + qp.P_c.transpose());
  qp.q_c = WA.transpose() * (aff.b - v_star.v_star);

  const int m_f = static_cast<int>(contact.friction_C.rows());
  qp.L = MatrixXd::Zero(2 * d + m_f, d);
  qp.L.topRows(d).setIdentity();
  qp.L.middleRows(d, d) = -MatrixXd::Identity(d, d);
  qp.L.bottomRightCorner(m_f, n_c) = contact.friction_C;
  qp.h.resize(2 * d + m_f);
  qp.h << bounds.u_upper, -bounds.u_lower, VectorXd::Zero(m_f);

  const MatrixXd M = mass_matrix(model, state.q);
  const Eigen::LLT<MatrixXd> M_llt(M);
  MatrixXd tau_map(n, d);
  tau_map << MatrixXd::Identity(n, n), contact.J_c.transpose();
  const MatrixXd Minv_map = M_llt.solve(tau_map);
  if (paper_literal_constraint) {
    // Printed variant: Jdot_c on the acceleration map and J_c on qdot.
    qp.D = contact.J_c_dot * Minv_map;
    qp.z = -contact.J_c * state.qdot - contact.J_c_dot * aff.Gamma;
  } else {
    // d/dt(J_c qdot) = 0  =>  J_c qddot = -Jdot_c qdot.
    qp.D = contact.J_c * Minv_map;
    qp.z = -contact.J_c_dot * state.qdot - contact.J_c * aff.Gamma;
  }
  return qp;
}

std::pair<ControlInput, ControlDiagnostics> Controller::control_step(
    const RobotModel& model, const JointState& state, const TaskReference& ref,
    const VectorXd& f_c_measured, double dt) {
  const int n = model.n();
  const auto pose = forward_kinematics(model, state.q);
  const Matrix6Xd J = jacobian(model, state.q);
  const Matrix6Xd J_dot = jacobian_dot(model, state);
  const Vector3d omega_E = J.bottomRows<3>() * state.qdot;
  const ContactSpec contact = make_contact_spec(bases_, J, J_dot, pose.R_E,
                                                omega_E, f_u_model_);
  const int n_c = contact.n_c();
  const VectorXd f_u = tangential_friction(contact, state.qdot);

  // Free linear directions under the (constant) desired orientation define
  // the p_u coordinates.
  MatrixXd u_dirs(3, contact.dim_u_lin);
  for (int j = 0; j < contact.dim_u_lin; ++j) {
    u_dirs.col(j) = ref.R_E_d * bases_.B_u.col(j).head<3>();
  }
  const Vector3d pdot_E = J.topRows<3>() * state.qdot;

  OuterLoopState os;
  os.q = state.q;
  os.qdot = state.qdot;
  os.p_u = u_dirs.transpose() * pose.p_E;
  os.pdot_u = u_dirs.transpose() * pdot_E;
  os.R_E = pose.R_E;
  os.omega_E = omega_E;
  os.f_c = f_c_measured;

  const VirtualInput v_star = outer_.virtual_input(os, ref, dt);
  const AffineSystem aff = build_affine(model, state, contact, f_u);
  const QPProblem qp = build_inner_qp(aff, v_star, weights_, bounds_, contact,
                                      model, state, paper_literal_);
  const QPSolution sol = solve_qp(qp, warm_start_);

  ControlDiagnostics diag;
  diag.qp_status = sol.status;
  diag.qp_iterations = sol.iterations;

  ControlInput u;
  if (sol.status == QPStatus::optimal) {
    u.tau = sol.u.head(n);
    u.f_c = sol.u.tail(n_c);
    warm_start_ = sol.active_set;
    last_u_ = u;
  } else {
    diag.fallback = true;
    warm_start_.reset();
    if (last_u_) {
      u = *last_u_;
    } else {
      u.tau = gravity_vector(model, state.q);
      u.f_c = VectorXd::Zero(n_c);
    }
  }

  VectorXd u_vec(n + n_c);
  u_vec << u.tau, u.f_c;
  diag.v_achieved = aff.A * u_vec + aff.b;
  const VectorXd w = weights_.expand(v_star.n, v_star.dim_u_lin, v_star.n_c);
  const VectorXd dv = diag.v_achieved - v_star.v_star;
  diag.residual_w = std::sqrt(dv.dot(w.asDiagonal() * dv));
  return {u, diag};
}

}  // namespace hybridctl
