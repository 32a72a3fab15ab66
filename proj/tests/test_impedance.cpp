#include <doctest.h>

#include <random>

#include "hybridctl/impedance.hpp"

using namespace hybridctl;

namespace {

MatrixXd curve(int n, double warp, double shift = 0) {
  MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    const double s = warp * i / (n - 1);
    x(i, 0) = std::sin(2 * M_PI * s) + shift;
    x(i, 1) = std::cos(2 * M_PI * s);
  }
  return x;
}

Demonstration demo_of(const MatrixXd& x, double dt = 0.05) {
  Demonstration d;
  d.x = x;
  d.t = VectorXd::LinSpaced(x.rows(), 0, dt * (x.rows() - 1));
  return d;
}

}  // namespace

TEST_CASE("dtw cost: identity, nonnegativity, warp invariance") {
  MatrixXd a = curve(80, 1.0);
  CHECK(dtw_cost(a, a) == doctest::Approx(0));
  MatrixXd warped = curve(120, 1.0);
  MatrixXd other = curve(80, 1.0, 2.5);
  CHECK(dtw_cost(a, warped) >= 0);
  // The same curve resampled should align far better than a shifted copy.
  CHECK(dtw_cost(a, warped) < 0.1 * dtw_cost(a, other));
}

TEST_CASE("dtw alignment resamples every demo to the target length") {
  DemoSet set;
  set.demos.push_back(demo_of(curve(100, 1.0)));
  set.demos.push_back(demo_of(curve(140, 1.0)));
  set.demos.push_back(demo_of(curve(70, 1.0)));
  DemoSet out = dtw_align(set, 200);
  REQUIRE(out.demos.size() == 3);
  for (const auto& d : out.demos) {
    CHECK(d.x.rows() == 200);
    CHECK(d.t.size() == 200);
    for (int i = 1; i < 200; ++i) CHECK(d.t[i] > d.t[i - 1]);
  }
  // After alignment the demos are near-coincident pointwise.
  for (int i = 0; i < 200; ++i) {
    CHECK((out.demos[1].x.row(i) - out.demos[0].x.row(i)).norm() < 0.15);
  }
  CHECK_THROWS(dtw_align(DemoSet{}, 100));
}

TEST_CASE("K = 1 EM reduces to the sample Gaussian") {
  std::mt19937 rng(51);
  std::normal_distribution<double> g(0, 1);
  const int N = 400;
  MatrixXd data(N, 3);
  for (int i = 0; i < N; ++i) {
    data(i, 0) = 0.1 * i;
    data(i, 1) = 2.0 + 0.5 * g(rng);
    data(i, 2) = -1.0 + 2.0 * g(rng);
  }
  GMMModel m = em_fit(data, 1);
  VectorXd mean = data.colwise().mean();
  MatrixXd centered = data.rowwise() - mean.transpose();
  MatrixXd cov = centered.transpose() * centered / N;
  CHECK((m.mu[0] - mean).norm() < 1e-8);
  CHECK((m.sigma[0] - cov).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(m.pi[0] == doctest::Approx(1.0));
}

TEST_CASE("EM separates two well-spaced components") {
  std::mt19937 rng(52);
  std::normal_distribution<double> g(0, 0.3);
  const int N = 600;
  MatrixXd data(N, 2);
  for (int i = 0; i < N; ++i) {
    const bool second = i % 2;
    data(i, 0) = (second ? 4.0 : 0.0) + g(rng);
    data(i, 1) = (second ? -3.0 : 1.0) + g(rng);
  }
  EMReport rep;
  GMMModel m = em_fit(data, 2, {}, &rep);
  for (size_t i = 1; i < rep.avg_loglik.size(); ++i) {
    CHECK(rep.avg_loglik[i] >= rep.avg_loglik[i - 1] - 1e-10);
  }
  Eigen::Vector2d a = m.mu[0], b = m.mu[1];
  if (a[0] > b[0]) std::swap(a, b);
  CHECK((a - Eigen::Vector2d(0, 1)).norm() < 0.1);
  CHECK((b - Eigen::Vector2d(4, -3)).norm() < 0.1);
  CHECK(m.pi[0] == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("EM is deterministic for a fixed seed") {
  DemoSet demos = synthesize_demos();
  MatrixXd data(5 * 200, 7);
  int row = 0;
  for (const auto& d : demos.demos) {
    for (int i = 0; i < 200; ++i) {
      data(row, 0) = d.t[i];
      data.row(row).tail(6) = d.x.row(i);
      ++row;
    }
  }
  GMMModel a = em_fit(data, 4), b = em_fit(data, 4);
  CHECK(a.iterations == b.iterations);
  for (int k = 0; k < 4; ++k) {
    CHECK((a.mu[k] - b.mu[k]).norm() == 0);
    CHECK(a.pi[k] == b.pi[k]);
  }
  CHECK(a.final_avg_loglik == b.final_avg_loglik);
  CHECK(a.iterations < 500);
}

TEST_CASE("GMR matches the single-Gaussian conditioning formula") {
  GMMModel m;
  m.K = 1;
  m.pi = {1.0};
  VectorXd mu(3);
  mu << 1.0, 2.0, -1.0;
  MatrixXd S(3, 3);
  S << 0.5, 0.2, -0.1, 0.2, 1.0, 0.3, -0.1, 0.3, 2.0;
  m.mu = {mu};
  m.sigma = {S};
  for (double t : {0.4, 1.0, 1.6}) {
    GMRResult r = gmr(m, t);
    VectorXd mu_o = mu.tail(2) + S.block(1, 0, 2, 1) / S(0, 0) * (t - mu[0]);
    MatrixXd S_o = S.block(1, 1, 2, 2) -
                   S.block(1, 0, 2, 1) * S.block(0, 1, 1, 2) / S(0, 0);
    CHECK((r.mu - mu_o).norm() < 1e-12);
    CHECK((r.sigma - S_o).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("GMR covariance stays PSD across the query range") {
  DemoSet demos = synthesize_demos();
  MatrixXd data(5 * 200, 7);
  int row = 0;
  for (const auto& d : demos.demos) {
    for (int i = 0; i < 200; ++i) {
      data(row, 0) = d.t[i];
      data.row(row).tail(6) = d.x.row(i);
      ++row;
    }
  }
  GMMModel m = em_fit(data, 4);
  for (int k = 0; k <= 100; ++k) {
    const double t = -1.0 + 13.0 * k / 100.0;  // includes out-of-range queries
    GMRResult r = gmr(m, t);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(r.sigma);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK(r.mu.allFinite());
  }
}

TEST_CASE("stiffness map: inverse variance with clamping") {
  MatrixXd S = Eigen::Vector3d(1e-6, 1e-4, 10.0).asDiagonal();
  VectorXd k = stiffness_from_covariance(S, 50, 1000, 0.02);
  CHECK(k[0] == 1000.0);                               // clamped high
  CHECK(k[1] == doctest::Approx(0.02 / (1e-4 + 1e-8)));
  CHECK(k[2] == 50.0);                                 // clamped low
}

TEST_CASE("stiffness schedule shape and critical damping") {
  DemoSet demos = synthesize_demos();
  MatrixXd data(5 * 200, 7);
  int row = 0;
  for (const auto& d : demos.demos) {
    for (int i = 0; i < 200; ++i) {
      data(row, 0) = d.t[i];
      data.row(row).tail(6) = d.x.row(i);
      ++row;
    }
  }
  GMMModel m = em_fit(data, 4);
  StiffnessMapOptions opts;
  StiffnessSchedule sched = make_stiffness_schedule(m, 0.0, 9.95, opts);
  REQUIRE((int)sched.samples.size() == opts.samples);
  for (const auto& s : sched.samples) {
    REQUIRE(s.K_P.size() == 6);
    CHECK((s.K_P.array() >= opts.k_min - 1e-12).all());
    CHECK((s.K_P.array() <= opts.k_max + 1e-12).all());
    CHECK((s.K_D - 2.0 * s.K_P.cwiseSqrt()).norm() < 1e-12);
  }
  // High dispersion at the sweep ends -> lower stiffness there than at the
  // middle of the sweep.
  const auto& first = sched.samples.front();
  const auto& mid = sched.samples[opts.samples / 2];
  CHECK(first.K_P.head(3).mean() < mid.K_P.head(3).mean());
}

TEST_CASE("synthetic demos: structure and determinism") {
  DemoSet a = synthesize_demos(), b = synthesize_demos();
  a.validate();
  REQUIRE(a.demos.size() == 5);
  for (const auto& d : a.demos) {
    CHECK(d.x.rows() == 200);
    CHECK(d.x.cols() == 6);
  }
  for (int m = 0; m < 5; ++m) {
    CHECK((a.demos[m].x - b.demos[m].x).norm() == 0);
  }
  DemoSet c = synthesize_demos(5, 200, 0.05, 99);
  CHECK((a.demos[0].x - c.demos[0].x).norm() > 0);
}
