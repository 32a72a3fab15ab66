#pragma once

// Brute-force QP oracle shared by the unit tests and the acceptance runner.

#include <random>
#include <vector>

#include "hybridctl/qp.hpp"

namespace hybridctl::test {

// Enumerate every subset of inequality rows as the candidate active set,
// solve the equality-constrained problem, and keep the best candidate that
// is primal and dual feasible. Exponential, test-only.
struct OracleResult {
  bool feasible = false;
  VectorXd u;
  double obj = 0;
};

inline double qp_objective(const QPProblem& p, const VectorXd& u) {
  return 0.5 * u.dot(p.P_c * u) + p.q_c.dot(u);
}

inline OracleResult enumerate_qp(const QPProblem& p, double tol = 1e-7) {
  const int d = p.dim();
  const int m = static_cast<int>(p.L.rows());
  const int peq = static_cast<int>(p.D.rows());
  OracleResult best;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) act.push_back(i);
    const int na = static_cast<int>(act.size());
    MatrixXd KKT(d + peq + na, d + peq + na);
    KKT.setZero();
    KKT.topLeftCorner(d, d) = p.P_c;
    VectorXd rhs(d + peq + na);
    rhs.head(d) = -p.q_c;
    if (peq) {
      KKT.block(d, 0, peq, d) = p.D;
      KKT.block(0, d, d, peq) = p.D.transpose();
      rhs.segment(d, peq) = p.z;
    }
    for (int a = 0; a < na; ++a) {
      KKT.block(d + peq + a, 0, 1, d) = p.L.row(act[a]);
      KKT.block(0, d + peq + a, d, 1) = p.L.row(act[a]).transpose();
      rhs[d + peq + a] = p.h[act[a]];
    }
    Eigen::FullPivLU<MatrixXd> lu(KKT);
    if (!lu.isInvertible()) continue;
    VectorXd sol = lu.solve(rhs);
    VectorXd u = sol.head(d);
    // Primal feasibility on inactive rows, dual feasibility on active ones.
    if (m && ((p.L * u - p.h).maxCoeff() > tol)) continue;
    bool dual_ok = true;
    for (int a = 0; a < na; ++a)
      if (sol[d + peq + a] < -tol) dual_ok = false;
    if (!dual_ok) continue;
    const double obj = qp_objective(p, u);
    if (!best.feasible || obj < best.obj - 1e-12) {
      best.feasible = true;
      best.u = u;
      best.obj = obj;
    }
  }
  return best;
}

inline QPProblem random_qp(std::mt19937& rng, int d, int m, int peq,
                           double box = 1.0) {
  std::normal_distribution<double> g(0, 1);
  MatrixXd R(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) R(i, j) = g(rng);
  QPProblem p;
  p.P_c = R.transpose() * R + 0.1 * MatrixXd::Identity(d, d);
  p.q_c = VectorXd::NullaryExpr(d, [&] { return g(rng); });
  p.L.resize(m, d);
  p.h.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) p.L(i, j) = g(rng);
    p.h[i] = box * std::abs(g(rng));
  }
  p.D.resize(peq, d);
  p.z.resize(peq);
  for (int i = 0; i < peq; ++i) {
    for (int j = 0; j < d; ++j) p.D(i, j) = g(rng);
    p.z[i] = 0.3 * g(rng);
  }
  return p;
}

}  // namespace hybridctl::test
