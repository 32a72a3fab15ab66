#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hybridctl {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

// Fixed transform from the parent joint frame to this joint's frame,
// followed by rotation of angle q about `axis` (revolute joints only).
struct JointDescription {
  Vector3d axis = Vector3d::UnitZ();  // unit vector, joint frame
  Matrix3d offset_R = Matrix3d::Identity();
  Vector3d offset_p = Vector3d::Zero();
};

// Inertial data of the link that moves with the joint, expressed in the
// joint frame (after the joint rotation).
struct LinkInertia {
  double mass = 1.0;        // kg
  Vector3d com = Vector3d::Zero();  // m, link frame
  Matrix3d inertia = Matrix3d::Identity();  // kg m^2 about the com, link frame
};

struct RobotModel {
  std::vector<JointDescription> joints;
  std::vector<LinkInertia> links;
  Vector3d gravity{0, 0, -9.81};
  // Fixed tool transform from the last joint frame to the end-effector frame.
  Matrix3d ee_offset_R = Matrix3d::Identity();
  Vector3d ee_offset_p = Vector3d::Zero();

  int n() const { return static_cast<int>(joints.size()); }

  // Throws std::invalid_argument on violated invariants (empty chain,
  // non-unit axis, non-positive mass, non-SPD inertia, list length mismatch).
  void validate() const;
};

struct JointState {
  VectorXd q;
  VectorXd qdot;
};

struct EndEffectorPose {
  Matrix3d R_E = Matrix3d::Identity();
  Vector3d p_E = Vector3d::Zero();
};

// Built-in test models.
RobotModel make_planar_2r(double l1 = 1.0, double l2 = 1.0, double m1 = 1.0,
                          double m2 = 1.0);
RobotModel make_arm_6dof();

}  // namespace hybridctl
