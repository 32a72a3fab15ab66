#include "hybridctl/impedance.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hybridctl {

void DemoSet::validate() const {
  if (demos.empty()) throw std::invalid_argument("demo set is empty");
  const int D = dim();
  for (const auto& d : demos) {
    if (d.x.rows() == 0) throw std::invalid_argument("empty demonstration");
    if (d.x.cols() != D) {
      throw std::invalid_argument("demonstration dimension mismatch");
    }
    if (d.t.size() != d.x.rows()) {
      throw std::invalid_argument("demonstration t/x length mismatch");
    }
    for (int i = 1; i < d.t.size(); ++i) {
      if (d.t[i] <= d.t[i - 1]) {
        throw std::invalid_argument("timestamps not strictly increasing");
      }
    }
  }
}

namespace {

// DP table for the warping path between sequences a (rows) and b.
MatrixXd dtw_table(const MatrixXd& a, const MatrixXd& b) {
  const int na = (int)a.rows(), nb = (int)b.rows();
  MatrixXd Dp = MatrixXd::Constant(na, nb, 1e300);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const double cost = (a.row(i) - b.row(j)).norm();
      double best;
      if (i == 0 && j == 0) best = 0;
      else if (i == 0) best = Dp(0, j - 1);
      else if (j == 0) best = Dp(i - 1, 0);
      else best = std::min({Dp(i - 1, j - 1), Dp(i - 1, j), Dp(i, j - 1)});
      Dp(i, j) = cost + best;
    }
  }
  return Dp;
}

MatrixXd resample_rows(const MatrixXd& x, int target_n) {
  const int n = (int)x.rows();
  if (n == target_n) return x;
  MatrixXd out(target_n, x.cols());
  for (int i = 0; i < target_n; ++i) {
    const double s = (target_n == 1) ? 0 : double(i) * (n - 1) / (target_n - 1);
    const int j = std::min((int)s, n - 2);
    const double a = s - j;
    out.row(i) = (1 - a) * x.row(j) + a * x.row(j + 1);
  }
  return out;
}

}  // namespace

double dtw_cost(const MatrixXd& a, const MatrixXd& b) {
  return dtw_table(a, b)((int)a.rows() - 1, (int)b.rows() - 1);
}

DemoSet dtw_align(const DemoSet& input, int target_n) {
  input.validate();
  if (input.demos.size() < 2) {
    throw std::invalid_argument("dtw_align: need at least 2 demonstrations");
  }
  const MatrixXd& ref = input.demos[0].x;
  const int nr = (int)ref.rows();

  DemoSet out;
  out.sample_period = input.sample_period;
  for (size_t m = 0; m < input.demos.size(); ++m) {
    const MatrixXd& x = input.demos[m].x;
    MatrixXd warped(nr, x.cols());
    if (m == 0) {
      warped = ref;
    } else {
      // Backtrack the optimal path, then average the samples of x matched
      // to each reference index.
      const MatrixXd Dp = dtw_table(ref, x);
      std::vector<std::pair<int, int>> path;
      int i = nr - 1, j = (int)x.rows() - 1;
      path.emplace_back(i, j);
      while (i > 0 || j > 0) {
        if (i == 0) --j;
        else if (j == 0) --i;
        else {
          const double diag = Dp(i - 1, j - 1);
          const double up = Dp(i - 1, j);
          const double left = Dp(i, j - 1);
          if (diag <= up && diag <= left) { --i; --j; }
          else if (up <= left) --i;
          else --j;
        }
        path.emplace_back(i, j);
      }
      warped.setZero();
      VectorXd counts = VectorXd::Zero(nr);
      for (auto [ri, xi] : path) {
        warped.row(ri) += x.row(xi);
        counts(ri) += 1;
      }
      for (int r = 0; r < nr; ++r) warped.row(r) /= counts(r);
    }
    Demonstration d;
    d.x = resample_rows(warped, target_n);
    d.t = VectorXd::LinSpaced(target_n, 0.0,
                              (target_n - 1) * input.sample_period);
    out.demos.push_back(std::move(d));
  }
  return out;
}

namespace {

double log_gauss(const VectorXd& x, const VectorXd& mu, const MatrixXd& sigma,
                 const Eigen::LDLT<MatrixXd>& ldlt) {
  const int d = (int)x.size();
  const VectorXd e = x - mu;
  const double quad = e.dot(ldlt.solve(e));
  double logdet = 0;
  for (int i = 0; i < d; ++i) logdet += std::log(ldlt.vectorD()(i));
  return -0.5 * (d * std::log(2 * M_PI) + logdet + quad);
}

void floor_covariance(MatrixXd& S, double floor) {
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  VectorXd ev = es.eigenvalues().cwiseMax(floor);
  S = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  S = 0.5 * (S + S.transpose());
}

}  // namespace

GMMModel em_fit(const MatrixXd& data, int K, const EMOptions& opts,
                EMReport* report) {
  const int N = (int)data.rows();
  const int d = (int)data.cols();
  if (K < 1) throw std::invalid_argument("em_fit: K must be >= 1");
  if (N < K * (d + 1)) {
    throw std::invalid_argument("em_fit: too few samples for K components");
  }
  std::mt19937 rng(opts.seed);

  // k-means++-style seeding.
  std::vector<int> centers;
  {
    std::uniform_int_distribution<int> uni(0, N - 1);
    centers.push_back(uni(rng));
    VectorXd d2 = VectorXd::Constant(N, 1e300);
    while ((int)centers.size() < K) {
      for (int i = 0; i < N; ++i) {
        const double dist =
            (data.row(i) - data.row(centers.back())).squaredNorm();
        d2(i) = std::min(d2(i), dist);
      }
      std::discrete_distribution<int> pick(d2.data(), d2.data() + N);
      centers.push_back(pick(rng));
    }
  }

  GMMModel gmm;
  gmm.K = K;
  gmm.pi.assign(K, 1.0 / K);
  gmm.mu.resize(K);
  gmm.sigma.resize(K);
  for (int k = 0; k < K; ++k) gmm.mu[k] = data.row(centers[k]).transpose();
  {
    // Hard-assign to the seeds for the initial covariances.
    std::vector<std::vector<int>> cluster(K);
    for (int i = 0; i < N; ++i) {
      int best = 0;
      double bd = 1e300;
      for (int k = 0; k < K; ++k) {
        const double dist = (data.row(i).transpose() - gmm.mu[k]).squaredNorm();
        if (dist < bd) { bd = dist; best = k; }
      }
      cluster[best].push_back(i);
    }
    for (int k = 0; k < K; ++k) {
      MatrixXd S = MatrixXd::Zero(d, d);
      if (cluster[k].size() >= 2) {
        VectorXd mean = VectorXd::Zero(d);
        for (int i : cluster[k]) mean += data.row(i).transpose();
        mean /= (double)cluster[k].size();
        for (int i : cluster[k]) {
          const VectorXd e = data.row(i).transpose() - mean;
          S += e * e.transpose();
        }
        S /= (double)cluster[k].size();
        gmm.mu[k] = mean;
        gmm.pi[k] = (double)cluster[k].size() / N;
      } else {
        S = MatrixXd::Identity(d, d);
      }
      floor_covariance(S, opts.cov_floor);
      gmm.sigma[k] = S;
    }
  }

  MatrixXd log_resp(N, K);
  double prev_avg = -1e300;
  bool reinit_used = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    // E step.
    std::vector<Eigen::LDLT<MatrixXd>> ldlts(K);
    for (int k = 0; k < K; ++k) ldlts[k].compute(gmm.sigma[k]);
    double loglik = 0;
    for (int i = 0; i < N; ++i) {
      double mx = -1e300;
      for (int k = 0; k < K; ++k) {
        log_resp(i, k) = std::log(gmm.pi[k]) +
                         log_gauss(data.row(i).transpose(), gmm.mu[k],
                                   gmm.sigma[k], ldlts[k]);
        mx = std::max(mx, log_resp(i, k));
      }
      double sum = 0;
      for (int k = 0; k < K; ++k) sum += std::exp(log_resp(i, k) - mx);
      const double lse = mx + std::log(sum);
      loglik += lse;
      for (int k = 0; k < K; ++k) {
        log_resp(i, k) = std::exp(log_resp(i, k) - lse);
      }
    }
    const double avg = loglik / N;
    if (report) report->avg_loglik.push_back(avg);
    gmm.final_avg_loglik = avg;
    gmm.iterations = it;

    // M step (log_resp now holds responsibilities).
    bool degenerate = false;
    for (int k = 0; k < K; ++k) {
      const double Nk = log_resp.col(k).sum();
      if (Nk / N < 1e-6) {
        if (reinit_used) {
          throw std::runtime_error(
              "em_fit: component collapsed twice (weight < 1e-6)");
        }
        reinit_used = true;
        std::uniform_int_distribution<int> uni(0, N - 1);
        gmm.mu[k] = data.row(uni(rng)).transpose();
        gmm.sigma[k] = MatrixXd::Identity(d, d);
        gmm.pi[k] = 1.0 / K;
        degenerate = true;
        continue;
      }
      gmm.pi[k] = Nk / N;
      VectorXd mean = VectorXd::Zero(d);
      for (int i = 0; i < N; ++i) {
        mean += log_resp(i, k) * data.row(i).transpose();
      }
      mean /= Nk;
      MatrixXd S = MatrixXd::Zero(d, d);
      for (int i = 0; i < N; ++i) {
        const VectorXd e = data.row(i).transpose() - mean;
        S += log_resp(i, k) * (e * e.transpose());
      }
      S /= Nk;
      floor_covariance(S, opts.cov_floor);
      gmm.mu[k] = mean;
      gmm.sigma[k] = S;
    }
    // Renormalize the weights (floor/reinit can nudge the sum).
    double psum = 0;
    for (double w : gmm.pi) psum += w;
    for (double& w : gmm.pi) w /= psum;

    if (!degenerate && it > 1 && avg - prev_avg < opts.tol) break;
    prev_avg = avg;
  }
  return gmm;
}

GMRResult gmr(const GMMModel& gmm, double t) {
  const int D = (int)gmm.mu[0].size() - 1;
  // Clamp to the demonstrated time range implied by the components.
  double t_lo = 1e300, t_hi = -1e300;
  for (int k = 0; k < gmm.K; ++k) {
    const double s = std::sqrt(gmm.sigma[k](0, 0));
    t_lo = std::min(t_lo, gmm.mu[k](0) - 3 * s);
    t_hi = std::max(t_hi, gmm.mu[k](0) + 3 * s);
  }
  t = std::clamp(t, t_lo, t_hi);

  VectorXd h(gmm.K);
  std::vector<VectorXd> m(gmm.K);
  std::vector<MatrixXd> C(gmm.K);
  double mx = -1e300;
  for (int k = 0; k < gmm.K; ++k) {
    const double mu_t = gmm.mu[k](0);
    const double s_tt = gmm.sigma[k](0, 0);
    const VectorXd mu_x = gmm.mu[k].tail(D);
    const VectorXd s_xt = gmm.sigma[k].col(0).tail(D);
    const MatrixXd S_xx = gmm.sigma[k].bottomRightCorner(D, D);
    m[k] = mu_x + s_xt * ((t - mu_t) / s_tt);
    C[k] = S_xx - s_xt * s_xt.transpose() / s_tt;
    h(k) = std::log(gmm.pi[k]) - 0.5 * (std::log(2 * M_PI * s_tt) +
                                        (t - mu_t) * (t - mu_t) / s_tt);
    mx = std::max(mx, h(k));
  }
  h = (h.array() - mx).exp();
  h /= h.sum();

  GMRResult res;
  res.mu = VectorXd::Zero(D);
  for (int k = 0; k < gmm.K; ++k) res.mu += h(k) * m[k];
  res.sigma = MatrixXd::Zero(D, D);
  for (int k = 0; k < gmm.K; ++k) {
    res.sigma += h(k) * (C[k] + m[k] * m[k].transpose());
  }
  res.sigma -= res.mu * res.mu.transpose();
  floor_covariance(res.sigma, 0.0);
  return res;
}

VectorXd stiffness_from_covariance(const MatrixXd& sigma_out, double k_min,
                                   double k_max, double scale) {
  if (!(k_min < k_max)) {
    throw std::invalid_argument("stiffness: k_min must be < k_max");
  }
  const int D = (int)sigma_out.rows();
  VectorXd K_P(D);
  for (int i = 0; i < D; ++i) {
    K_P(i) = std::clamp(scale / (sigma_out(i, i) + 1e-8), k_min, k_max);
  }
  return K_P;
}

StiffnessSchedule make_stiffness_schedule(const GMMModel& gmm, double t0,
                                          double t1,
                                          const StiffnessMapOptions& opts) {
  StiffnessSchedule sched;
  for (int i = 0; i < opts.samples; ++i) {
    StiffnessSample s;
    s.t = t0 + (t1 - t0) * i / std::max(1, opts.samples - 1);
    const auto r = gmr(gmm, s.t);
    s.K_P = stiffness_from_covariance(r.sigma, opts.k_min, opts.k_max,
                                      opts.scale);
    s.K_D = 2.0 * s.K_P.cwiseSqrt();
    sched.samples.push_back(std::move(s));
  }
  return sched;
}

DemoSet synthesize_demos(int M, int N, double sample_period, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.9, 1.1);

  DemoSet set;
  set.sample_period = sample_period;
  const double T = (N - 1) * sample_period;
  for (int m = 0; m < M; ++m) {
    const double gamma = scale(rng);  // per-demo time distortion
    Demonstration d;
    d.t = VectorXd::LinSpaced(N, 0.0, T);
    d.x.resize(N, 6);
    for (int i = 0; i < N; ++i) {
      const double s = std::pow(double(i) / (N - 1), gamma);  // phase in [0,1]
      // Dispersion is low mid-sweep and high near the ends.
      const double sd_pos = 0.002 + 0.006 * std::pow(2 * s - 1, 2);
      const double sd_rot = 0.01 + 0.03 * std::pow(2 * s - 1, 2);
      d.x(i, 0) = 0.60 + 0.005 * std::sin(4 * M_PI * s) + sd_pos * gauss(rng);
      d.x(i, 1) = 0.008 * std::sin(2 * M_PI * s) + sd_pos * gauss(rng);
      d.x(i, 2) = 0.60 + 0.30 * s + sd_pos * gauss(rng);
      // omega-theta around the constant probe orientation.
      d.x(i, 3) = 0.05 * std::sin(2 * M_PI * s) + sd_rot * gauss(rng);
      d.x(i, 4) = M_PI / 2 + 0.04 * std::cos(2 * M_PI * s) +
                  sd_rot * gauss(rng);
      d.x(i, 5) = 0.03 * std::sin(4 * M_PI * s) + sd_rot * gauss(rng);
    }
    set.demos.push_back(std::move(d));
  }
  return set;
}

}  // namespace hybridctl
