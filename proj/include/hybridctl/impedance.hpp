#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hybridctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One demonstration: N samples of (t, x) with x stacking position (m) and
// orientation in exponential coordinates (rad).
struct Demonstration {
  VectorXd t;   // strictly increasing
  MatrixXd x;   // N x D
};

struct DemoSet {
  std::vector<Demonstration> demos;
  double sample_period = 0.05;  // s

  int dim() const { return demos.empty() ? 0 : (int)demos[0].x.cols(); }
  void validate() const;
};

struct GMMModel {
  int K = 4;
  std::vector<double> pi;
  std::vector<VectorXd> mu;      // (1 + D) over (t, x)
  std::vector<MatrixXd> sigma;   // (1 + D) x (1 + D)
  double final_avg_loglik = 0;
  int iterations = 0;
};

struct StiffnessSample {
  double t = 0;
  VectorXd K_P;  // diagonal entries
  VectorXd K_D;  // = 2 sqrt(K_P)
};

struct StiffnessSchedule {
  std::vector<StiffnessSample> samples;
};

// Classic DP dynamic time warping of every demo against the first, followed
// by uniform resampling to target_n points. Throws on empty demos.
DemoSet dtw_align(const DemoSet& demos, int target_n = 200);

// DTW alignment cost between two sequences (Euclidean local distance).
double dtw_cost(const MatrixXd& a, const MatrixXd& b);

struct EMOptions {
  double tol = 1e-4;      // average log-likelihood increase
  int max_iter = 500;
  double cov_floor = 1e-8;
  unsigned seed = 0;
};

struct EMReport {
  std::vector<double> avg_loglik;  // per accepted iteration
};

// EM over pooled (t, x) samples from a k-means++-style seeded init.
GMMModel em_fit(const MatrixXd& data, int K, const EMOptions& opts = {},
                EMReport* report = nullptr);

// Gaussian conditioning on the time input; law-of-total-variance output
// covariance. Query times clamp to the fitted range.
struct GMRResult {
  VectorXd mu;
  MatrixXd sigma;
};
GMRResult gmr(const GMMModel& gmm, double t);

// K_P_ii = clamp(scale / (sigma_ii + eps), k_min, k_max).
VectorXd stiffness_from_covariance(const MatrixXd& sigma_out, double k_min,
                                   double k_max, double scale);

struct StiffnessMapOptions {
  double k_min = 50.0;
  double k_max = 1000.0;
  double scale = 0.02;  // mid-variance of the synthetic demos -> K_P ~ 200
  int samples = 200;
};

StiffnessSchedule make_stiffness_schedule(const GMMModel& gmm, double t0,
                                          double t1,
                                          const StiffnessMapOptions& opts);

// Smooth spine-sweep curves plus seeded jitter with position-dependent
// variance; stands in for kinesthetic demonstration logs.
DemoSet synthesize_demos(int M = 5, int N = 200, double sample_period = 0.05,
                         unsigned seed = 7);

}  // namespace hybridctl
