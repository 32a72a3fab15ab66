#include "hybridctl/robot_model.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace hybridctl {

void RobotModel::validate() const {
  if (joints.empty()) throw std::invalid_argument("model: no joints");
  if (joints.size() != links.size()) {
    throw std::invalid_argument("model: joint/link list length mismatch");
  }
  for (const auto& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("model: joint axis not unit norm");
    }
  }
  for (const auto& l : links) {
    if (!(l.mass > 0.0)) throw std::invalid_argument("model: mass must be > 0");
    if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("model: inertia not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix3d> es(l.inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument("model: inertia not positive definite");
    }
  }
}

RobotModel make_planar_2r(double l1, double l2, double m1, double m2) {
  RobotModel m;
  JointDescription j0, j1;
  j0.axis = Vector3d::UnitZ();
  j1.axis = Vector3d::UnitZ();
  j1.offset_p = Vector3d(l1, 0, 0);
  m.joints = {j0, j1};

  LinkInertia k0, k1;
  k0.mass = m1;
  k0.com = Vector3d(l1 / 2, 0, 0);
  k0.inertia = Vector3d(1e-3, m1 * l1 * l1 / 12, m1 * l1 * l1 / 12)
                   .asDiagonal();
  k1.mass = m2;
  k1.com = Vector3d(l2 / 2, 0, 0);
  k1.inertia = Vector3d(1e-3, m2 * l2 * l2 / 12, m2 * l2 * l2 / 12)
                   .asDiagonal();
  m.links = {k0, k1};
  m.ee_offset_p = Vector3d(l2, 0, 0);
  m.validate();
  return m;
}

// A 6R arm with a desk-scale reach (~1.25 m shoulder to tool). Link lengths
// loosely follow a small industrial arm; inertial values are plausible
// rod/cylinder figures, not identified parameters.
RobotModel make_arm_6dof() {
  RobotModel m;
  auto joint = [](const Vector3d& axis, const Vector3d& p) {
    JointDescription j;
    j.axis = axis;
    j.offset_p = p;
    return j;
  };
  auto link = [](double mass, const Vector3d& com, const Vector3d& I_diag) {
    LinkInertia l;
    l.mass = mass;
    l.com = com;
    l.inertia = I_diag.asDiagonal();
    return l;
  };
  m.joints = {
      joint(Vector3d::UnitZ(), {0, 0, 0.20}),
      joint(Vector3d::UnitY(), {0, 0, 0}),
      joint(Vector3d::UnitY(), {0, 0, 0.60}),
      joint(Vector3d::UnitZ(), {0, 0, 0.25}),
      joint(Vector3d::UnitY(), {0, 0, 0.25}),
      joint(Vector3d::UnitZ(), {0, 0, 0}),
  };
  m.links = {
      link(4.0, {0, 0, -0.05}, {0.02, 0.02, 0.01}),
      link(4.5, {0, 0, 0.30}, {0.14, 0.14, 0.01}),
      link(3.0, {0, 0, 0.12}, {0.02, 0.02, 0.008}),
      link(2.0, {0, 0, 0.12}, {0.01, 0.01, 0.004}),
      link(1.5, {0, 0, 0.02}, {0.004, 0.004, 0.002}),
      link(0.8, {0, 0, 0.08}, {0.002, 0.002, 0.001}),
  };
  m.ee_offset_p = Vector3d(0, 0, 0.15);
  m.validate();
  return m;
}

}  // namespace hybridctl
