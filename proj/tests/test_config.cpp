#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hybridctl/config.hpp"

using namespace hybridctl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hybridctl_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

}  // namespace

TEST_CASE("parse, typed getters, comments, unknown-key rejection") {
  ConfigFile cfg = ConfigFile::parse(
      "# leading comment\n"
      "[alpha]\n"
      "x = 1.5  # trailing comment\n"
      "name = hello\n"
      "v = 1 2 3\n"
      "[beta]\n"
      "x = 7\n",
      "<test>");
  CHECK(cfg.get_double("alpha", "x") == 1.5);
  CHECK(cfg.get_double("beta", "x") == 7.0);
  CHECK(cfg.get_string("alpha", "name") == "hello");
  CHECK((cfg.get_vec3("alpha", "v") - Vector3d(1, 2, 3)).norm() == 0);
  CHECK(cfg.get_double_or("alpha", "missing", -1.0) == -1.0);
  CHECK_NOTHROW(cfg.ensure_all_consumed());

  ConfigFile cfg2 = ConfigFile::parse("[s]\na = 1\nb = 2\n", "<test>");
  cfg2.get_double("s", "a");
  CHECK_THROWS_WITH_AS(cfg2.ensure_all_consumed(),
                       doctest::Contains("unknown key s.b"), ConfigError);

  CHECK_THROWS_AS(ConfigFile::parse("x = 1\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[s\n", "<t>"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[s]\nnovalue\n", "<t>"), ConfigError);
  ConfigFile bad = ConfigFile::parse("[s]\nx = abc\n", "<t>");
  CHECK_THROWS_AS(bad.get_double("s", "x"), ConfigError);
}

TEST_CASE("serialize round-trips") {
  const std::string text = "[a]\nx = 1.5\n\n[b]\ny = 2 3\n\n";
  ConfigFile cfg = ConfigFile::parse(text, "<t>");
  CHECK(cfg.serialize() == text);
  ConfigFile again = ConfigFile::parse(cfg.serialize(), "<t>");
  CHECK(again.serialize() == text);
}

TEST_CASE("robot model file round trip against the builtin") {
  TempDir tmp;
  const RobotModel ref = make_planar_2r();
  std::ostringstream os;
  os.precision(17);
  os << "[robot]\nn = 2\ngravity_mps2 = 0 0 -9.81\n";
  for (int i = 0; i < 2; ++i) {
    const auto& j = ref.joints[i];
    const auto& l = ref.links[i];
    os << "[joint" << i << "]\naxis = " << j.axis.transpose()
       << "\noffset_xyz_m = " << j.offset_p.transpose() << "\n";
    os << "[link" << i << "]\nmass_kg = " << l.mass
       << "\ncom_m = " << l.com.transpose() << "\ninertia_kgm2 = "
       << l.inertia(0, 0) << " " << l.inertia(1, 1) << " " << l.inertia(2, 2)
       << " 0 0 0\n";
  }
  os << "[ee]\noffset_xyz_m = 1 0 0\n";
  RobotModel loaded = load_robot_model(tmp.file("2r.cfg", os.str()));
  REQUIRE(loaded.n() == 2);
  VectorXd q(2);
  q << 0.4, -0.9;
  CHECK((forward_kinematics(loaded, q).p_E -
         forward_kinematics(ref, q).p_E).norm() < 1e-12);
  CHECK((mass_matrix(loaded, q) - mass_matrix(ref, q)).norm() < 1e-12);

  CHECK_THROWS_AS(load_robot_model(tmp.file("bad.cfg", "[robot]\nn = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(load_robot_model((tmp.path / "nope.cfg").string()),
                  ConfigError);
}

TEST_CASE("scenario config: defaults, overrides, unknown keys") {
  TempDir tmp;
  const std::string path = tmp.file("scn.cfg",
                                    "[robot]\nbuiltin = arm6\n"
                                    "[scenario]\nforce = sine:5,6,10\n"
                                    "duration_s = 2\n"
                                    "[gains]\nkc_i = 12\n"
                                    "[weights]\nw = 0.1 1 1 1\n");
  LoadedConfig lc = load_scenario_config(path);
  CHECK(lc.scenario.robot.n() == 6);
  CHECK(lc.scenario.duration == 2.0);
  CHECK(lc.scenario.gains.Kc_I[0] == 12.0);
  CHECK(lc.scenario.weights.w_q == 0.1);
  CHECK_FALSE(lc.has_guidance);
  const auto* sine = std::get_if<SinusoidForce>(&lc.scenario.force_reference);
  REQUIRE(sine);
  CHECK(sine->amplitude == 5.0);
  CHECK(sine->period == 6.0);
  CHECK(sine->offset == 10.0);
  // R_E_d derived from board normal (-x) and sweep (+z).
  Matrix3d expect;
  expect << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  CHECK((lc.scenario.R_E_d - expect).norm() < 1e-12);

  const std::string bad = tmp.file("bad.cfg",
                                   "[robot]\nbuiltin = arm6\n"
                                   "[scenario]\ntypo_key = 3\n");
  CHECK_THROWS_WITH_AS(load_scenario_config(bad),
                       doctest::Contains("unknown key"), ConfigError);
}

TEST_CASE("force spec parsing") {
  CHECK(std::get<StepForce>(parse_force_spec("step:15")).value == 15.0);
  const auto s = std::get<SinusoidForce>(parse_force_spec("sine:5,6,10"));
  CHECK(s.amplitude == 5.0);
  CHECK_THROWS_AS(parse_force_spec("step:1,2"), ConfigError);
  CHECK_THROWS_AS(parse_force_spec("ramp:3"), ConfigError);
}

TEST_CASE("qp problem file") {
  TempDir tmp;
  const std::string path = tmp.file("qp.cfg",
                                    "[qp]\nd = 1\nm = 1\np = 0\n"
                                    "P = 1\nq = -3\nL = 1\nh = 1\n");
  QPProblem p = load_qp_problem(path);
  QPSolution sol = solve_qp(p);
  REQUIRE(sol.status == QPStatus::optimal);
  CHECK(sol.u[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(
      load_qp_problem(tmp.file("bad.cfg", "[qp]\nd = 2\nm = 0\np = 0\n"
                                          "P = 1 0 0\nq = 0 0\n")),
      ConfigError);
}

TEST_CASE("trajectory csv header and payload") {
  CHECK(trajectory_csv_header(2) ==
        "t,q0,q1,qd0,qd1,fx_c,fd_c,ex,ey,ez,tau0,tau1,"
        "qp_iters,qp_status,resid_w");
  CHECK(trajectory_csv_header(6).rfind("t,q0,q1,q2,q3,q4,q5,qd0", 0) == 0);

  TempDir tmp;
  TrajectoryLog log;
  TrajectoryRecord r;
  r.t = 0.25;
  r.q = Eigen::Vector2d(1, 2);
  r.qdot = Eigen::Vector2d(3, 4);
  r.f_c_true = VectorXd::Constant(1, 9.5);
  r.f_c_d = VectorXd::Constant(1, 10.0);
  r.rot_err = Vector3d(0.1, 0.2, 0.3);
  r.tau = Eigen::Vector2d(5, 6);
  r.qp_iterations = 3;
  r.qp_status = QPStatus::optimal;
  r.residual_w = 0.125;
  log.records.push_back(r);
  const std::string path = (tmp.path / "log.csv").string();
  write_trajectory_csv(log, 2, path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == trajectory_csv_header(2));
  CHECK(line == "0.25,1,2,3,4,9.5,10,0.1,0.2,0.3,5,6,3,optimal,0.125");
}

TEST_CASE("demo set and stiffness schedule round trips") {
  TempDir tmp;
  DemoSet demos = synthesize_demos(3, 50);
  const std::string dir = (tmp.path / "demos").string();
  write_demo_set(demos, dir);
  DemoSet loaded = load_demo_set(dir);
  REQUIRE(loaded.demos.size() == 3);
  CHECK(loaded.sample_period == demos.sample_period);
  for (int m = 0; m < 3; ++m) {
    CHECK((loaded.demos[m].x - demos.demos[m].x).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((loaded.demos[m].t - demos.demos[m].t).cwiseAbs().maxCoeff() < 1e-9);
  }

  StiffnessSchedule sched;
  for (int i = 0; i < 4; ++i) {
    StiffnessSample s;
    s.t = 0.1 * i;
    s.K_P = VectorXd::Constant(6, 100.0 + i);
    s.K_D = 2.0 * s.K_P.cwiseSqrt();
    sched.samples.push_back(s);
  }
  const std::string sp = (tmp.path / "sched.csv").string();
  write_stiffness_schedule(sched, sp);
  StiffnessSchedule back = load_stiffness_schedule(sp);
  REQUIRE(back.samples.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(back.samples[i].t == doctest::Approx(sched.samples[i].t));
    CHECK((back.samples[i].K_P - sched.samples[i].K_P).norm() < 1e-9);
    CHECK((back.samples[i].K_D - sched.samples[i].K_D).norm() < 1e-9);
  }
}
