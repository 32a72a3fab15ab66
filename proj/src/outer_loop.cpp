#include "hybridctl/outer_loop.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridctl {

GainSet GainSet::scenario_defaults(int n, int dim_u_lin, int n_c) {
  GainSet g;
  g.Kq_P = VectorXd::Constant(n, 10.0);
  g.Kq_D = VectorXd::Constant(n, 2.0 * std::sqrt(10.0));
  g.Ku_P = VectorXd::Constant(dim_u_lin, 400.0);
  g.Ku_D = VectorXd::Constant(dim_u_lin, 40.0);
  g.KR_P = Vector3d::Constant(400.0);
  g.KR_D = Vector3d::Constant(40.0);
  g.Kc_P = VectorXd::Constant(n_c, 1.0);
  g.Kc_I = VectorXd::Constant(n_c, 10.0);
  return g;
}

VirtualInput OuterLoop::virtual_input(const OuterLoopState& state,
                                      const TaskReference& ref, double dt) {
  if (dt <= 0) throw std::invalid_argument("outer loop: dt must be > 0");
  const int n = static_cast<int>(state.q.size());
  const int du = static_cast<int>(state.p_u.size());
  const int nc = static_cast<int>(state.f_c.size());
  if (force_integral_.size() != nc) force_integral_ = VectorXd::Zero(nc);

  VirtualInput v;
  v.n = n;
  v.dim_u_lin = du;
  v.n_c = nc;
  v.v_star.resize(n + du + 3 + nc);

  v.v_star.head(n) =
      ref.qddot_d - gains_.Kq_D.cwiseProduct(state.qdot - ref.qdot_d) -
      gains_.Kq_P.cwiseProduct(state.q - ref.q_d);

  v.v_star.segment(n, du) =
      ref.pddot_u_d - gains_.Ku_D.cwiseProduct(state.pdot_u - ref.pdot_u_d) -
      gains_.Ku_P.cwiseProduct(state.p_u - ref.p_u_d);

  // Swapped arguments make e_R the current-minus-desired deviation, matching
  // the (x - x^d) convention of the other PD rows; the direct-order error
  // points toward the target and would invert the feedback sign.
  const Vector3d e_R = rotation_error(ref.R_E_d, state.R_E);
  v.v_star.segment(n + du, 3) =
      ref.omegadot_E_d -
      gains_.KR_D.cwiseProduct(state.omega_E - ref.omega_E_d) -
      gains_.KR_P.cwiseProduct(e_R);

  const VectorXd e_f = state.f_c - ref.f_c_d;
  force_integral_ += e_f * dt;
  force_integral_ = force_integral_.cwiseMax(-gains_.integral_clamp)
                        .cwiseMin(gains_.integral_clamp);
  v.v_star.tail(nc) = ref.f_c_d - gains_.Kc_P.cwiseProduct(e_f) -
                      gains_.Kc_I.cwiseProduct(force_integral_);
  return v;
}

}  // namespace hybridctl
