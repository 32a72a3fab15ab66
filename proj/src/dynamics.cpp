#include "hybridctl/dynamics.hpp"

#include <stdexcept>

#include "hybridctl/so3.hpp"

namespace hybridctl {
namespace {

// World-frame quantities from one forward sweep of the chain.
struct ChainKinematics {
  std::vector<Matrix3d> R;        // link frame orientation
  std::vector<Vector3d> p;        // joint origin
  std::vector<Vector3d> z;        // joint axis
  std::vector<Vector3d> omega;    // link angular velocity
  std::vector<Vector3d> pdot;     // joint origin velocity
  Matrix3d R_E;
  Vector3d p_E;
  Vector3d pdot_E;
  Vector3d omega_E;
};

Matrix3d axis_rotation(const Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

ChainKinematics forward_pass(const RobotModel& model, const VectorXd& q,
                             const VectorXd& qdot) {
  const int n = model.n();
  if (q.size() != n || qdot.size() != n) {
    throw std::invalid_argument("dynamics: joint vector dimension mismatch");
  }
  if (!q.allFinite() || !qdot.allFinite()) {
    throw std::invalid_argument("dynamics: non-finite joint state");
  }
  ChainKinematics k;
  k.R.resize(n);
  k.p.resize(n);
  k.z.resize(n);
  k.omega.resize(n);
  k.pdot.resize(n);

  Matrix3d R_prev = Matrix3d::Identity();
  Vector3d p_prev = Vector3d::Zero();
  Vector3d w_prev = Vector3d::Zero();
  Vector3d v_prev = Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto& j = model.joints[i];
    const Matrix3d R_pre = R_prev * j.offset_R;
    k.p[i] = p_prev + R_prev * j.offset_p;
    k.pdot[i] = v_prev + w_prev.cross(k.p[i] - p_prev);
    k.z[i] = R_pre * j.axis;
    k.R[i] = R_pre * axis_rotation(j.axis, q[i]);
    k.omega[i] = w_prev + k.z[i] * qdot[i];

    R_prev = k.R[i];
    p_prev = k.p[i];
    w_prev = k.omega[i];
    v_prev = k.pdot[i];
  }
  k.R_E = R_prev * model.ee_offset_R;
  k.p_E = p_prev + R_prev * model.ee_offset_p;
  k.pdot_E = v_prev + w_prev.cross(k.p_E - p_prev);
  k.omega_E = w_prev;
  return k;
}

}  // namespace

EndEffectorPose forward_kinematics(const RobotModel& model, const VectorXd& q) {
  const auto k = forward_pass(model, q, VectorXd::Zero(model.n()));
  return {k.R_E, k.p_E};
}

VectorXd inverse_dynamics(const RobotModel& model, const VectorXd& q,
                          const VectorXd& qdot, const VectorXd& qddot) {
  const int n = model.n();
  if (qddot.size() != n) {
    throw std::invalid_argument("dynamics: qddot dimension mismatch");
  }
  const auto k = forward_pass(model, q, qdot);

  // Acceleration sweep; gravity enters as a fictitious base acceleration.
  std::vector<Vector3d> alpha(n), a_origin(n), a_com(n), r(n);
  Vector3d alpha_prev = Vector3d::Zero();
  Vector3d a_prev = -model.gravity;
  Vector3d w_prev = Vector3d::Zero();
  Vector3d p_prev = Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Vector3d d = k.p[i] - p_prev;
    a_origin[i] = a_prev + alpha_prev.cross(d) + w_prev.cross(w_prev.cross(d));
    alpha[i] = alpha_prev + k.z[i] * qddot[i] +
               w_prev.cross(k.z[i] * qdot[i]);
    r[i] = k.R[i] * model.links[i].com;
    a_com[i] = a_origin[i] + alpha[i].cross(r[i]) +
               k.omega[i].cross(k.omega[i].cross(r[i]));
    alpha_prev = alpha[i];
    a_prev = a_origin[i];
    w_prev = k.omega[i];
    p_prev = k.p[i];
  }

  // Force sweep, tip to base.
  VectorXd tau(n);
  Vector3d f_next = Vector3d::Zero();
  Vector3d n_next = Vector3d::Zero();  // moment about joint origin i+1
  for (int i = n - 1; i >= 0; --i) {
    const auto& link = model.links[i];
    const Matrix3d I_w = k.R[i] * link.inertia * k.R[i].transpose();
    const Vector3d F = link.mass * a_com[i];
    const Vector3d N =
        I_w * alpha[i] + k.omega[i].cross(I_w * k.omega[i]);
    Vector3d n_i = N + r[i].cross(F) + n_next;
    if (i + 1 < n) n_i += (k.p[i + 1] - k.p[i]).cross(f_next);
    const Vector3d f_i = F + f_next;
    tau[i] = k.z[i].dot(n_i);
    f_next = f_i;
    n_next = n_i;  // about p[i]; shifted by the (p[i+1]-p[i]) term above
  }
  return tau;
}

VectorXd gravity_vector(const RobotModel& model, const VectorXd& q) {
  const int n = model.n();
  return inverse_dynamics(model, q, VectorXd::Zero(n), VectorXd::Zero(n));
}

VectorXd bias_forces(const RobotModel& model, const JointState& state) {
  const int n = model.n();
  return inverse_dynamics(model, state.q, state.qdot, VectorXd::Zero(n)) -
         gravity_vector(model, state.q);
}

MatrixXd mass_matrix(const RobotModel& model, const VectorXd& q) {
  const int n = model.n();
  const auto k = forward_pass(model, q, VectorXd::Zero(n));

  // Composite bodies from the tip.
  std::vector<double> mc(n);
  std::vector<Vector3d> pc(n);
  std::vector<Matrix3d> Ic(n);  // about composite com, world axes
  for (int i = n - 1; i >= 0; --i) {
    const auto& link = model.links[i];
    const double m = link.mass;
    const Vector3d p_com = k.p[i] + k.R[i] * link.com;
    const Matrix3d I_w = k.R[i] * link.inertia * k.R[i].transpose();
    if (i == n - 1) {
      mc[i] = m;
      pc[i] = p_com;
      Ic[i] = I_w;
    } else {
      mc[i] = m + mc[i + 1];
      pc[i] = (m * p_com + mc[i + 1] * pc[i + 1]) / mc[i];
      auto shift = [](double mass, const Vector3d& d) -> Matrix3d {
        return mass * (d.squaredNorm() * Matrix3d::Identity() -
                       d * d.transpose());
      };
      Ic[i] = I_w + shift(m, p_com - pc[i]) + Ic[i + 1] +
              shift(mc[i + 1], pc[i + 1] - pc[i]);
    }
  }

  MatrixXd M = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    // Unit acceleration of joint j moves the composite body j.
    const Vector3d f = mc[j] * k.z[j].cross(pc[j] - k.p[j]);
    const Vector3d n_com = Ic[j] * k.z[j];
    for (int i = 0; i <= j; ++i) {
      M(i, j) = k.z[i].dot(n_com + (pc[j] - k.p[i]).cross(f));
      M(j, i) = M(i, j);
    }
  }
  return M;
}

Matrix6Xd jacobian(const RobotModel& model, const VectorXd& q) {
  const int n = model.n();
  const auto k = forward_pass(model, q, VectorXd::Zero(n));
  Matrix6Xd J(6, n);
  for (int i = 0; i < n; ++i) {
    J.col(i).head<3>() = k.z[i].cross(k.p_E - k.p[i]);
    J.col(i).tail<3>() = k.z[i];
  }
  return J;
}

Matrix6Xd jacobian_dot(const RobotModel& model, const JointState& state) {
  const int n = model.n();
  const auto k = forward_pass(model, state.q, state.qdot);
  Matrix6Xd Jd(6, n);
  for (int i = 0; i < n; ++i) {
    const Vector3d zdot = k.omega[i].cross(k.z[i]);
    Jd.col(i).head<3>() =
        zdot.cross(k.p_E - k.p[i]) + k.z[i].cross(k.pdot_E - k.pdot[i]);
    Jd.col(i).tail<3>() = zdot;
  }
  return Jd;
}

double total_energy(const RobotModel& model, const JointState& state) {
  const int n = model.n();
  const auto k = forward_pass(model, state.q, state.qdot);
  double E = 0;
  for (int i = 0; i < n; ++i) {
    const auto& link = model.links[i];
    const Vector3d r = k.R[i] * link.com;
    const Vector3d v_com = k.pdot[i] + k.omega[i].cross(r);
    const Matrix3d I_w = k.R[i] * link.inertia * k.R[i].transpose();
    E += 0.5 * link.mass * v_com.squaredNorm() +
         0.5 * k.omega[i].dot(I_w * k.omega[i]);
    E -= link.mass * model.gravity.dot(k.p[i] + r);
  }
  return E;
}

}  // namespace hybridctl
