#pragma once

#include <functional>
#include <variant>

#include "hybridctl/inner_loop.hpp"

namespace hybridctl {

struct BoardPlane {
  Vector3d point{0.6, 0, 0};     // any point on the board, m
  Vector3d normal{-1, 0, 0};     // unit, pointing from board toward the robot
};

struct SinusoidForce {
  double amplitude = 5.0;  // N
  double period = 6.0;     // s
  double offset = 10.0;    // N
};
struct StepForce {
  double value = 15.0;  // N
};
struct ScheduleForce {
  std::vector<std::pair<double, double>> samples;  // (t, N), interpolated
};
using ForceReference = std::variant<SinusoidForce, StepForce, ScheduleForce>;

double eval_force_reference(const ForceReference& ref, double t);

struct ContactConfig {
  int constrained_axis = 2;   // body axis index of the probe direction
  double basis_sign = -1.0;   // -1: compression positive for a pushing probe
  double mu = 0.5;
  TangentialFrictionModel f_u_model;
  // First-order low-pass on the measured force fed back to the controller.
  // The one-sample measurement delay otherwise destabilizes the force loop
  // at the Nyquist frequency for proportional gains near 1.
  double force_filter_hz = 100.0;
};

struct BaumgarteGains {
  double alpha = 20.0;  // 1/s
  double beta = 20.0;   // 1/s
};

// Post-step stabilization: mass-weighted projection of qdot onto the
// constraint null space and one Newton correction of q toward zero gap.
// Keeps the semi-implicit Euler discretization from accumulating
// constraint drift that acceleration-level Baumgarte only bounds.
struct ProjectionConfig {
  bool enabled = true;
  double gap_tol = 1e-12;
};

struct Scenario {
  RobotModel robot;
  BoardPlane board;
  ContactConfig contact;
  Vector3d start_pose{0.6, 0, 0.6};
  Vector3d end_pose{0.6, 0, 0.9};
  double sweep_speed = 0.05;   // m/s
  double duration = 6.0;       // s
  double control_rate = 1000;  // Hz
  ForceReference force_reference = SinusoidForce{};
  TaskWeights weights;
  GainSet gains = GainSet::scenario_defaults(6, 2, 1);
  ControlBounds bounds = ControlBounds::defaults(6, 1);
  Matrix3d R_E_d = (Matrix3d() << 0, 0, 1, 0, 1, 0, -1, 0, 0).finished();
  BaumgarteGains baumgarte;
  ProjectionConfig projection;
  double force_ramp_time = 0.2;  // s, contact acquisition ramp
  bool paper_literal_constraint = false;
  unsigned seed = 0;

  void validate() const;
};

struct TrajectoryRecord {
  double t = 0;
  VectorXd q, qdot;
  EndEffectorPose pose;
  VectorXd f_c_true;   // constraint force from the physics
  VectorXd f_c_cmd;    // force component of the QP solution
  VectorXd f_c_d;
  VectorXd tau;
  VectorXd qdd_model;  // acceleration block of A u + b for the applied u
  Vector3d rot_err = Vector3d::Zero();
  double gap = 0;              // constraint-coordinate contact gap, m
  double jc_qdot = 0;          // |J_c qdot|
  int qp_iterations = 0;
  QPStatus qp_status = QPStatus::optimal;
  double residual_w = 0;
  bool fallback = false;
};

struct TrajectoryLog {
  std::vector<TrajectoryRecord> records;
  int fallback_events = 0;
};

// Forward dynamics with the plane contact as a KKT saddle system, Baumgarte
// stabilized. Dynamics quantities are obtained through the inverse-dynamics
// path (RNEA columns), separate from the controller's assembly.
// Throws std::runtime_error on constraint rank loss.
struct ForwardDynamicsResult {
  VectorXd qddot;
  VectorXd f_c_true;
};
ForwardDynamicsResult constrained_forward_dynamics(
    const RobotModel& model, const JointState& state, const VectorXd& tau,
    const ContactSpec& contact, const VectorXd& gap_c,
    const BaumgarteGains& bg);

// Semi-implicit Euler.
JointState sim_step(const JointState& state, const VectorXd& qddot, double dt);

// Post-step stabilization (see ProjectionConfig).
JointState project_to_constraint(const RobotModel& model, JointState state,
                                 const WrenchBases& bases,
                                 const BoardPlane& board,
                                 const ProjectionConfig& cfg);

// Damped-least-squares inverse kinematics to a full pose (plumbing).
VectorXd solve_ik(const RobotModel& model, const Vector3d& p_target,
                  const Matrix3d& R_target, const VectorXd& q0,
                  double damping = 1e-3, int max_iter = 500,
                  double tol = 1e-10);

// Hook invoked each control step; may adjust the reference (used by the
// guidance loop). Receives the elapsed time and current end-effector pose.
using ReferenceHook =
    std::function<void(double t, const EndEffectorPose&, TaskReference&)>;

TrajectoryLog run_scenario(const Scenario& scn, const ReferenceHook& hook = {});

}  // namespace hybridctl
