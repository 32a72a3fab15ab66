#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace hybridctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// min 1/2 u^T P_c u + q_c^T u  s.t.  L u <= h,  D u = z.
struct QPProblem {
  MatrixXd P_c;
  VectorXd q_c;
  MatrixXd L;  // m x d (may be 0 x d)
  VectorXd h;
  MatrixXd D;  // p x d (may be 0 x d)
  VectorXd z;

  int dim() const { return static_cast<int>(P_c.rows()); }
  // Throws on inconsistent dimensions or asymmetric P_c (beyond 1e-10).
  void validate() const;
};

enum class QPStatus { optimal, infeasible, max_iter };

struct KKTResiduals {
  double stationarity = 0;
  double primal_eq = 0;
  double primal_ineq = 0;
  double complementarity = 0;
  double max() const;
};

struct QPSolution {
  VectorXd u;
  VectorXd lambda_ineq;
  VectorXd nu_eq;
  QPStatus status = QPStatus::max_iter;
  KKTResiduals kkt;
  int iterations = 0;
  std::vector<int> active_set;  // indices of active inequality rows
  std::string note;             // e.g. regularization applied
};

struct QPOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

QPSolution solve_qp(const QPProblem& prob,
                    const std::optional<std::vector<int>>& warm_start = {},
                    const QPOptions& opts = {});

KKTResiduals kkt_residuals(const QPProblem& prob, const QPSolution& sol);

const char* to_string(QPStatus s);

}  // namespace hybridctl
