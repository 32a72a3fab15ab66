#pragma once

#include "hybridctl/outer_loop.hpp"
#include "hybridctl/qp.hpp"

namespace hybridctl {

// v = A u + b with u = [tau; f_c].
struct AffineSystem {
  MatrixXd A;       // (n + (6 - n_c)) + n_c rows x (n + n_c)
  VectorXd b;
  VectorXd Gamma;   // M^{-1}(J_u^T f_u - c - g)
};

struct ControlInput {
  VectorXd tau;
  VectorXd f_c;
};

struct TaskWeights {
  double w_q = 0.1;
  double w_pu = 1.0;
  double w_R = 1.0;
  double w_fc = 1.0;

  VectorXd expand(int n, int dim_u_lin, int n_c) const;
};

struct ControlBounds {
  VectorXd u_lower;  // n + n_c
  VectorXd u_upper;

  static ControlBounds defaults(int n, int n_c, double tau_max = 50.0,
                                double f_c_max = 60.0);
};

AffineSystem build_affine(const RobotModel& model, const JointState& state,
                          const ContactSpec& contact, const VectorXd& f_u);

// Reformulated standard-form QP. `paper_literal_constraint` reproduces the
// printed equality row (Jdot_c on the torque map, J_c on the drift) instead
// of the differentiated-constraint-consistent one.
QPProblem build_inner_qp(const AffineSystem& aff, const VirtualInput& v_star,
                         const TaskWeights& W, const ControlBounds& bounds,
                         const ContactSpec& contact, const RobotModel& model,
                         const JointState& state,
                         bool paper_literal_constraint = false);

struct ControlDiagnostics {
  VectorXd v_achieved;
  double residual_w = 0;  // || v - v* ||_W
  QPStatus qp_status = QPStatus::optimal;
  int qp_iterations = 0;
  bool fallback = false;  // held previous u after an unsolved QP
};

// Two-loop controller: outer PID -> affine model -> QP. Stateful via the
// force integral and the warm-started active set; one instance per loop.
class Controller {
 public:
  Controller(GainSet gains, TaskWeights weights, ControlBounds bounds,
             WrenchBases bases, TangentialFrictionModel f_u_model,
             bool paper_literal_constraint = false)
      : outer_(std::move(gains)),
        weights_(weights),
        bounds_(std::move(bounds)),
        bases_(std::move(bases)),
        f_u_model_(f_u_model),
        paper_literal_(paper_literal_constraint) {}

  // f_c_measured comes from the simulator (or a sensor).
  std::pair<ControlInput, ControlDiagnostics> control_step(
      const RobotModel& model, const JointState& state,
      const TaskReference& ref, const VectorXd& f_c_measured, double dt);

  OuterLoop& outer() { return outer_; }
  const TaskWeights& weights() const { return weights_; }

 private:
  OuterLoop outer_;
  TaskWeights weights_;
  ControlBounds bounds_;
  WrenchBases bases_;
  TangentialFrictionModel f_u_model_;
  bool paper_literal_;
  std::optional<std::vector<int>> warm_start_;
  std::optional<ControlInput> last_u_;
};

}  // namespace hybridctl
