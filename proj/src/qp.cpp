#include "hybridctl/qp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>

namespace hybridctl {

void QPProblem::validate() const {
  const int d = dim();
  if (P_c.cols() != d || q_c.size() != d) {
    throw std::invalid_argument("qp: P_c/q_c dimension mismatch");
  }
  if ((P_c - P_c.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("qp: P_c not symmetric");
  }
  if (L.rows() != h.size() || (L.rows() > 0 && L.cols() != d)) {
    throw std::invalid_argument("qp: L/h dimension mismatch");
  }
  if (D.rows() != z.size() || (D.rows() > 0 && D.cols() != d)) {
    throw std::invalid_argument("qp: D/z dimension mismatch");
  }
  if (D.rows() > d) throw std::invalid_argument("qp: p > d");
}

double KKTResiduals::max() const {
  return std::max({stationarity, primal_eq, primal_ineq, complementarity});
}

const char* to_string(QPStatus s) {
  switch (s) {
    case QPStatus::optimal: return "optimal";
    case QPStatus::infeasible: return "infeasible";
    case QPStatus::max_iter: return "max_iter";
  }
  return "?";
}

KKTResiduals kkt_residuals(const QPProblem& prob, const QPSolution& sol) {
  KKTResiduals r;
  VectorXd stat = prob.P_c * sol.u + prob.q_c;
  if (prob.L.rows() > 0) stat += prob.L.transpose() * sol.lambda_ineq;
  if (prob.D.rows() > 0) stat += prob.D.transpose() * sol.nu_eq;
  r.stationarity = stat.lpNorm<Eigen::Infinity>();
  if (prob.D.rows() > 0) {
    r.primal_eq = (prob.D * sol.u - prob.z).lpNorm<Eigen::Infinity>();
  }
  if (prob.L.rows() > 0) {
    const VectorXd s = prob.L * sol.u - prob.h;
    r.primal_ineq = s.cwiseMax(0.0).lpNorm<Eigen::Infinity>();
    r.complementarity =
        (sol.lambda_ineq.array() * s.array()).abs().maxCoeff();
  }
  return r;
}

namespace {

struct EqpResult {
  VectorXd u;
  VectorXd mu;  // multipliers for [D; active L rows]
  bool ok = false;
};

// Equality-constrained subproblem via Schur complement on the (regularized,
// hence PD) Hessian.
EqpResult solve_eqp(const Eigen::LLT<MatrixXd>& P_llt, const VectorXd& q,
                    const MatrixXd& N, const VectorXd& b) {
  EqpResult res;
  if (N.rows() == 0) {
    res.u = P_llt.solve(-q);
    res.mu.resize(0);
    res.ok = true;
    return res;
  }
  const MatrixXd PiNt = P_llt.solve(N.transpose());
  const MatrixXd S = N * PiNt;
  const VectorXd rhs = -(N * P_llt.solve(q) + b);
  Eigen::FullPivLU<MatrixXd> lu(S);
  lu.setThreshold(1e-12);
  if (lu.rank() < S.rows()) {
    res.ok = false;
    return res;
  }
  res.mu = lu.solve(rhs);
  res.u = P_llt.solve(-(q + N.transpose() * res.mu));
  res.ok = true;
  return res;
}

}  // namespace

QPSolution solve_qp(const QPProblem& prob,
                    const std::optional<std::vector<int>>& warm_start,
                    const QPOptions& opts) {
  prob.validate();
  const int d = prob.dim();
  const int m = static_cast<int>(prob.L.rows());
  const int p = static_cast<int>(prob.D.rows());

  QPSolution sol;
  sol.lambda_ineq = VectorXd::Zero(m);
  sol.nu_eq = VectorXd::Zero(p);

  // Convexity floor.
  MatrixXd P = 0.5 * (prob.P_c + prob.P_c.transpose());
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(P);
    const double lo = es.eigenvalues().minCoeff();
    const double eps = 1e-9;
    if (lo < eps) {
      P += (eps + std::max(0.0, -lo)) * MatrixXd::Identity(d, d);
      sol.note = "regularized";
    }
  }
  Eigen::LLT<MatrixXd> P_llt(P);

  // Inconsistent equality system is reported, not thrown.
  if (p > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(prob.D);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
      const VectorXd u_ls = qr.solve(prob.z);
      const double resid = (prob.D * u_ls - prob.z).norm();
      if (resid > opts.tol * (1.0 + prob.z.norm())) {
        sol.status = QPStatus::infeasible;
        sol.u = u_ls;
        return sol;
      }
    }
  }

  std::vector<int> active;
  if (warm_start) {
    for (int idx : *warm_start) {
      if (idx >= 0 && idx < m) active.push_back(idx);
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
  }

  auto assemble = [&](const std::vector<int>& act, MatrixXd& N, VectorXd& b) {
    N.resize(p + static_cast<int>(act.size()), d);
    b.resize(N.rows());
    if (p > 0) {
      N.topRows(p) = prob.D;
      b.head(p) = prob.z;
    }
    for (size_t i = 0; i < act.size(); ++i) {
      N.row(p + static_cast<int>(i)) = prob.L.row(act[i]);
      b(p + static_cast<int>(i)) = prob.h(act[i]);
    }
  };

  for (sol.iterations = 1; sol.iterations <= opts.max_iter; ++sol.iterations) {
    MatrixXd N;
    VectorXd b;
    assemble(active, N, b);
    EqpResult eqp = solve_eqp(P_llt, prob.q_c, N, b);
    if (!eqp.ok) {
      // Dependent working set; drop the most recently added row.
      if (!active.empty()) {
        active.pop_back();
        continue;
      }
      sol.status = QPStatus::infeasible;
      return sol;
    }

    // Dual feasibility over the active inequalities.
    int drop = -1;
    double most_negative = -opts.tol;
    for (size_t i = 0; i < active.size(); ++i) {
      const double lam = eqp.mu(p + static_cast<int>(i));
      if (lam < most_negative) {
        most_negative = lam;
        drop = static_cast<int>(i);
      }
    }
    if (drop >= 0) {
      active.erase(active.begin() + drop);
      continue;
    }

    // Primal feasibility over the inactive inequalities.
    int add = -1;
    double worst = opts.tol;
    for (int r = 0; r < m; ++r) {
      if (std::find(active.begin(), active.end(), r) != active.end()) continue;
      const double v = prob.L.row(r).dot(eqp.u) - prob.h(r);
      if (v > worst) {
        worst = v;
        add = r;
      }
    }
    if (add < 0) {
      sol.u = eqp.u;
      if (p > 0) sol.nu_eq = eqp.mu.head(p);
      sol.lambda_ineq.setZero();
      for (size_t i = 0; i < active.size(); ++i) {
        sol.lambda_ineq(active[i]) = eqp.mu(p + static_cast<int>(i));
      }
      sol.active_set = active;
      sol.status = QPStatus::optimal;
      sol.kkt = kkt_residuals(prob, sol);
      return sol;
    }

    // A violated row dependent on the working set (L_add = N^T alpha) cannot
    // simply be appended. If the coefficients on the active inequality rows
    // are all <= 0, every point satisfying the working set keeps the row
    // violated (Farkas direction): infeasible. Otherwise drop the blocking
    // row with the largest positive coefficient and retry.
    if (N.rows() > 0) {
      Eigen::ColPivHouseholderQR<MatrixXd> qrN(N.transpose());
      qrN.setThreshold(1e-10);
      MatrixXd Naug(N.rows() + 1, d);
      Naug << N, prob.L.row(add);
      Eigen::ColPivHouseholderQR<MatrixXd> qrA(Naug.transpose());
      qrA.setThreshold(1e-10);
      if (qrA.rank() == qrN.rank()) {
        const VectorXd alpha = qrN.solve(prob.L.row(add).transpose());
        int block = -1;
        double best = 1e-9;
        for (size_t i = 0; i < active.size(); ++i) {
          const double a = alpha(p + static_cast<int>(i));
          if (a > best) {
            best = a;
            block = static_cast<int>(i);
          }
        }
        if (block < 0) {
          sol.status = QPStatus::infeasible;
          sol.u = eqp.u;
          return sol;
        }
        active.erase(active.begin() + block);
        active.push_back(add);
        continue;
      }
    }
    active.push_back(add);
  }
  sol.status = QPStatus::max_iter;
  return sol;
}

}  // namespace hybridctl
