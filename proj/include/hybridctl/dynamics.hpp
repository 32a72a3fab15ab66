#pragma once

#include "hybridctl/robot_model.hpp"

namespace hybridctl {

using Matrix6Xd = Eigen::Matrix<double, 6, Eigen::Dynamic>;

// World-frame pose of the end-effector frame.
EndEffectorPose forward_kinematics(const RobotModel& model, const VectorXd& q);

// Joint-space mass matrix via the composite-rigid-body recursion (SPD).
MatrixXd mass_matrix(const RobotModel& model, const VectorXd& q);

// Coriolis/centrifugal vector c(q, qdot), gravity excluded.
VectorXd bias_forces(const RobotModel& model, const JointState& state);

// g(q) = inverse_dynamics(q, 0, 0).
VectorXd gravity_vector(const RobotModel& model, const VectorXd& q);

// Recursive Newton-Euler: tau = M qdd + c + g (no external wrench).
VectorXd inverse_dynamics(const RobotModel& model, const VectorXd& q,
                          const VectorXd& qdot, const VectorXd& qddot);

// Stacked [linear; angular] world-frame geometric Jacobian of the
// end-effector point.
Matrix6Xd jacobian(const RobotModel& model, const VectorXd& q);

// Time derivative of jacobian() along qdot.
Matrix6Xd jacobian_dot(const RobotModel& model, const JointState& state);

// Kinetic + potential energy, for conservation checks.
double total_energy(const RobotModel& model, const JointState& state);

}  // namespace hybridctl
