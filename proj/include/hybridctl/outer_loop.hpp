#pragma once

#include "hybridctl/contact.hpp"
#include "hybridctl/so3.hpp"

namespace hybridctl {

// Desired trajectories for the four task channels.
struct TaskReference {
  VectorXd q_d, qdot_d, qddot_d;         // n
  VectorXd p_u_d, pdot_u_d, pddot_u_d;   // dim_u_lin
  Matrix3d R_E_d = Matrix3d::Identity();
  Vector3d omega_E_d = Vector3d::Zero();
  Vector3d omegadot_E_d = Vector3d::Zero();
  VectorXd f_c_d;                        // n_c
};

struct GainSet {
  VectorXd Kq_P, Kq_D;   // n, diagonal entries
  VectorXd Ku_P, Ku_D;   // dim_u_lin
  Vector3d KR_P, KR_D;
  VectorXd Kc_P, Kc_I;   // n_c
  double integral_clamp = 20.0;  // N s

  static GainSet scenario_defaults(int n, int dim_u_lin, int n_c);
};

struct VirtualInput {
  VectorXd v_star;  // [qdd*: n; pdd_u*: dim_u_lin; omegadot_E*: 3; f_c*: n_c]
  int n = 0, dim_u_lin = 0, n_c = 0;
};

// Measured quantities the outer loop reacts to.
struct OuterLoopState {
  VectorXd q, qdot;       // n
  VectorXd p_u, pdot_u;   // dim_u_lin, free linear coordinates
  Matrix3d R_E = Matrix3d::Identity();
  Vector3d omega_E = Vector3d::Zero();
  VectorXd f_c;           // measured contact force
};

// PID on the stacked task vector. Stateful through the force integral;
// one instance per control loop.
class OuterLoop {
 public:
  explicit OuterLoop(GainSet gains) : gains_(std::move(gains)) {}

  VirtualInput virtual_input(const OuterLoopState& state,
                             const TaskReference& ref, double dt);

  void reset() { force_integral_.setZero(); }
  const VectorXd& force_integral() const { return force_integral_; }
  const GainSet& gains() const { return gains_; }
  GainSet& gains() { return gains_; }

 private:
  GainSet gains_;
  VectorXd force_integral_;  // lazily sized
};

}  // namespace hybridctl
