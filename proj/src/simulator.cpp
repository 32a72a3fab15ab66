#include "hybridctl/simulator.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hybridctl/so3.hpp"

namespace hybridctl {

double eval_force_reference(const ForceReference& ref, double t) {
  if (const auto* s = std::get_if<SinusoidForce>(&ref)) {
    return s->amplitude * std::sin(2.0 * M_PI * t / s->period) + s->offset;
  }
  if (const auto* s = std::get_if<StepForce>(&ref)) {
    return s->value;
  }
  const auto& sched = std::get<ScheduleForce>(ref).samples;
  if (sched.empty()) throw std::invalid_argument("force schedule is empty");
  if (t <= sched.front().first) return sched.front().second;
  if (t >= sched.back().first) return sched.back().second;
  for (size_t i = 1; i < sched.size(); ++i) {
    if (t <= sched[i].first) {
      const auto& [t0, f0] = sched[i - 1];
      const auto& [t1, f1] = sched[i];
      return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
    }
  }
  return sched.back().second;
}

void Scenario::validate() const {
  robot.validate();
  if (control_rate <= 0) throw std::invalid_argument("scenario: control_rate");
  if (duration <= 0) throw std::invalid_argument("scenario: duration");
  if (std::abs(board.normal.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("scenario: board normal not unit");
  }
}

ForwardDynamicsResult constrained_forward_dynamics(
    const RobotModel& model, const JointState& state, const VectorXd& tau,
    const ContactSpec& contact, const VectorXd& gap_c,
    const BaumgarteGains& bg) {
  const int n = model.n();
  const int n_c = contact.n_c();

  // Inverse-dynamics route: M columns from unit accelerations, bias from
  // RNEA at zero acceleration.
  const VectorXd bias = inverse_dynamics(model, state.q, state.qdot,
                                         VectorXd::Zero(n));  // c + g
  const VectorXd g = gravity_vector(model, state.q);
  MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    M.col(j) =
        inverse_dynamics(model, state.q, VectorXd::Zero(n),
                         VectorXd::Unit(n, j)) -
        g;
  }

  const VectorXd f_u = tangential_friction(contact, state.qdot);
  const VectorXd rhs1 = tau + contact.J_u.transpose() * f_u - bias;
  const VectorXd rhs2 = -contact.J_c_dot * state.qdot -
                        2.0 * bg.alpha * (contact.J_c * state.qdot) -
                        bg.beta * bg.beta * gap_c;

  const Eigen::LLT<MatrixXd> M_llt(M);
  const MatrixXd JMJt =
      contact.J_c * M_llt.solve(contact.J_c.transpose());
  Eigen::FullPivLU<MatrixXd> lu(JMJt);
  lu.setThreshold(1e-10);
  if (lu.rank() < n_c) {
    std::ostringstream os;
    os << "constraint Jacobian rank loss at q = [" << state.q.transpose()
       << "]";
    throw std::runtime_error(os.str());
  }
  ForwardDynamicsResult res;
  res.f_c_true = lu.solve(rhs2 - contact.J_c * M_llt.solve(rhs1));
  res.qddot = M_llt.solve(rhs1 + contact.J_c.transpose() * res.f_c_true);
  return res;
}

JointState sim_step(const JointState& state, const VectorXd& qddot,
                    double dt) {
  JointState next;
  next.qdot = state.qdot + qddot * dt;
  next.q = state.q + next.qdot * dt;
  if (!next.q.allFinite() || !next.qdot.allFinite()) {
    throw std::runtime_error("simulation diverged: non-finite state");
  }
  return next;
}

JointState project_to_constraint(const RobotModel& model, JointState state,
                                 const WrenchBases& bases,
                                 const BoardPlane& board,
                                 const ProjectionConfig& cfg) {
  if (!cfg.enabled) return state;
  const MatrixXd M = mass_matrix(model, state.q);
  const Eigen::LLT<MatrixXd> M_llt(M);
  // Newton correction of the plane gap first. The gap is the distance to
  // the fixed board plane, so its gradient is n^T J_lin with the constant
  // plane normal (the wrench-basis row G^T J would drag the orientation
  // dependence of G into the gradient).
  for (int pass = 0; pass < 3; ++pass) {
    const auto pose = forward_kinematics(model, state.q);
    const double gap = board.normal.dot(pose.p_E - board.point);
    if (std::abs(gap) <= cfg.gap_tol) break;
    const Matrix6Xd J = jacobian(model, state.q);
    const Eigen::RowVectorXd a = board.normal.transpose() * J.topRows<3>();
    const VectorXd Minv_at = M_llt.solve(a.transpose());
    state.q -= Minv_at * (gap / a.dot(Minv_at));
  }
  // Mass-weighted velocity projection onto null(J_c) at the corrected q.
  {
    const auto pose = forward_kinematics(model, state.q);
    const Matrix6Xd J = jacobian(model, state.q);
    const auto [G, G_u] = contact_maps(bases, pose.R_E);
    const MatrixXd J_c = G.transpose() * J;
    const MatrixXd MinvJct = M_llt.solve(J_c.transpose());
    const Eigen::LDLT<MatrixXd> S((J_c * MinvJct).eval());
    state.qdot -= MinvJct * S.solve(J_c * state.qdot);
  }
  return state;
}

VectorXd solve_ik(const RobotModel& model, const Vector3d& p_target,
                  const Matrix3d& R_target, const VectorXd& q0, double damping,
                  int max_iter, double tol) {
  const int n = model.n();
  VectorXd q = q0;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int restart = 0; restart < 8; ++restart) {
    for (int it = 0; it < max_iter; ++it) {
      const auto pose = forward_kinematics(model, q);
      Eigen::Matrix<double, 6, 1> err;
      err.head<3>() = p_target - pose.p_E;
      err.tail<3>() = log_so3(R_target * pose.R_E.transpose());
      if (err.norm() < tol) return q;
      const Matrix6Xd J = jacobian(model, q);
      const MatrixXd JJt =
          J * J.transpose() +
          damping * damping * MatrixXd::Identity(6, 6);
      q += J.transpose() * JJt.ldlt().solve(err);
    }
    for (int i = 0; i < n; ++i) q[i] = q0[i] + jitter(rng);
  }
  throw std::runtime_error("inverse kinematics did not converge");
}

TrajectoryLog run_scenario(const Scenario& scn, const ReferenceHook& hook) {
  scn.validate();
  const RobotModel& model = scn.robot;
  const int n = model.n();
  const double dt = 1.0 / scn.control_rate;
  const int steps = static_cast<int>(std::llround(scn.duration / dt));

  const WrenchBases bases = make_single_axis_bases(
      scn.contact.constrained_axis, scn.contact.basis_sign);
  Controller ctrl(scn.gains, scn.weights, scn.bounds, bases,
                  scn.contact.f_u_model, scn.paper_literal_constraint);

  const Vector3d sweep = scn.end_pose - scn.start_pose;
  const double length = sweep.norm();
  const Vector3d dir = length > 0 ? Vector3d(sweep / length)
                                  : Vector3d::Zero();

  // Initial configuration on the board at the start pose.
  VectorXd q_seed(n);
  q_seed.setZero();
  if (n >= 5) {
    q_seed[1] = 0.6;
    q_seed[2] = -1.0;
    q_seed[4] = 0.5;
  }
  JointState state;
  state.q = solve_ik(model, scn.start_pose, scn.R_E_d, q_seed);
  state.qdot = VectorXd::Zero(n);

  // Free linear directions under the constant desired orientation.
  MatrixXd u_dirs(3, 2);
  int c = 0;
  for (int j = 0; j < bases.B_u.cols(); ++j) {
    if (bases.B_u.col(j).head<3>().cwiseAbs().maxCoeff() > 0.5) {
      u_dirs.col(c++) = scn.R_E_d * bases.B_u.col(j).head<3>();
    }
  }

  TrajectoryLog log;
  log.records.reserve(steps);
  VectorXd f_meas = VectorXd::Zero(bases.n_c);
  VectorXd q_d_prev = state.q;

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double s = std::min(scn.sweep_speed * t, length);
    const Vector3d p_d = scn.start_pose + s * dir;
    const Vector3d pdot_d =
        (s < length) ? Vector3d(scn.sweep_speed * dir) : Vector3d::Zero();

    TaskReference ref;
    ref.R_E_d = scn.R_E_d;
    ref.q_d = solve_ik(model, p_d, scn.R_E_d, q_d_prev, 1e-3, 50, 1e-12);
    q_d_prev = ref.q_d;
    {
      const Matrix6Xd J_d = jacobian(model, ref.q_d);
      Eigen::Matrix<double, 6, 1> twist_d;
      twist_d << pdot_d, Vector3d::Zero();
      const MatrixXd JJt =
          J_d * J_d.transpose() + 1e-6 * MatrixXd::Identity(6, 6);
      ref.qdot_d = J_d.transpose() * JJt.ldlt().solve(twist_d);
    }
    ref.qddot_d = VectorXd::Zero(n);
    ref.p_u_d = u_dirs.transpose() * p_d;
    ref.pdot_u_d = u_dirs.transpose() * pdot_d;
    ref.pddot_u_d = VectorXd::Zero(2);
    const double ramp =
        scn.force_ramp_time > 0 ? std::min(t / scn.force_ramp_time, 1.0) : 1.0;
    ref.f_c_d = VectorXd::Constant(
        bases.n_c, ramp * eval_force_reference(scn.force_reference, t));

    const auto pose = forward_kinematics(model, state.q);
    if (hook) hook(t, pose, ref);

    auto [u, diag] = ctrl.control_step(model, state, ref, f_meas, dt);

    // Physics side: contact quantities at the current state.
    const Matrix6Xd J = jacobian(model, state.q);
    const Matrix6Xd J_dot = jacobian_dot(model, state);
    const Vector3d omega_E = J.bottomRows<3>() * state.qdot;
    const ContactSpec contact =
        make_contact_spec(bases, J, J_dot, pose.R_E, omega_E,
                          scn.contact.f_u_model, scn.contact.mu);
    // Signed distance to the fixed plane, expressed in the constraint
    // coordinate (G's linear direction coincides with the plane normal
    // when the probe is aligned).
    VectorXd gap_c = VectorXd::Constant(
        bases.n_c, scn.board.normal.dot(pose.p_E - scn.board.point));
    const auto fd = constrained_forward_dynamics(model, state, u.tau, contact,
                                                 gap_c, scn.baumgarte);

    TrajectoryRecord rec;
    rec.t = t;
    rec.q = state.q;
    rec.qdot = state.qdot;
    rec.pose = pose;
    rec.f_c_true = fd.f_c_true;
    rec.f_c_cmd = u.f_c;
    rec.f_c_d = ref.f_c_d;
    rec.tau = u.tau;
    rec.qdd_model = diag.v_achieved.head(n);
    rec.rot_err = rotation_error(pose.R_E, scn.R_E_d);
    rec.gap = gap_c.lpNorm<Eigen::Infinity>();
    rec.jc_qdot = (contact.J_c * state.qdot).lpNorm<Eigen::Infinity>();
    rec.qp_iterations = diag.qp_iterations;
    rec.qp_status = diag.qp_status;
    rec.residual_w = diag.residual_w;
    rec.fallback = diag.fallback;
    if (diag.fallback) ++log.fallback_events;
    log.records.push_back(std::move(rec));

    state = sim_step(state, fd.qddot, dt);
    state = project_to_constraint(model, std::move(state), bases, scn.board,
                                  scn.projection);
    if (scn.contact.force_filter_hz > 0) {
      const double tau_f = 1.0 / (2.0 * M_PI * scn.contact.force_filter_hz);
      const double a = dt / (tau_f + dt);
      f_meas += a * (fd.f_c_true - f_meas);
    } else {
      f_meas = fd.f_c_true;
    }
  }
  return log;
}

}  // namespace hybridctl
