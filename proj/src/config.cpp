#include "hybridctl/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace hybridctl {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

}  // namespace

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

ConfigFile ConfigFile::parse(const std::string& text,
                             const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_.emplace_back(section,
                                 std::vector<std::pair<std::string,
                                                       std::string>>{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    if (cfg.sections_.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside of any [section]");
    }
    cfg.sections_.back().second.emplace_back(trim(line.substr(0, eq)),
                                             trim(line.substr(eq + 1)));
  }
  return cfg;
}

const std::string* ConfigFile::find(const std::string& section,
                                    const std::string& key) const {
  for (const auto& [name, entries] : sections_) {
    if (name != section) continue;
    for (const auto& [k, v] : entries) {
      if (k == key) {
        consumed_.insert(section + "." + key);
        return &v;
      }
    }
  }
  return nullptr;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key) const {
  const auto* v = find(section, key);
  if (!v) {
    throw ConfigError(origin_ + ": missing required key " + section + "." +
                      key);
  }
  return *v;
}

std::string ConfigFile::get_string_or(const std::string& section,
                                      const std::string& key,
                                      const std::string& fallback) const {
  const auto* v = find(section, key);
  return v ? *v : fallback;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key) const {
  const std::string s = get_string(section, key);
  try {
    size_t pos;
    const double d = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError(origin_ + ": " + section + "." + key +
                      ": not a number: '" + s + "'");
  }
}

double ConfigFile::get_double_or(const std::string& section,
                                 const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int ConfigFile::get_int_or(const std::string& section, const std::string& key,
                           int fallback) const {
  return has(section, key) ? (int)std::llround(get_double(section, key))
                           : fallback;
}

VectorXd ConfigFile::get_vector(const std::string& section,
                                const std::string& key) const {
  const auto toks = tokens(get_string(section, key));
  VectorXd v(toks.size());
  for (size_t i = 0; i < toks.size(); ++i) {
    try {
      v[i] = std::stod(toks[i]);
    } catch (...) {
      throw ConfigError(origin_ + ": " + section + "." + key +
                        ": bad vector entry '" + toks[i] + "'");
    }
  }
  return v;
}

Vector3d ConfigFile::get_vec3(const std::string& section,
                              const std::string& key) const {
  const VectorXd v = get_vector(section, key);
  if (v.size() != 3) {
    throw ConfigError(origin_ + ": " + section + "." + key +
                      ": expected 3 values");
  }
  return v.head<3>();
}

void ConfigFile::ensure_all_consumed() const {
  for (const auto& [name, entries] : sections_) {
    for (const auto& [k, v] : entries) {
      if (!consumed_.count(name + "." + k)) {
        throw ConfigError(origin_ + ": unknown key " + name + "." + k);
      }
    }
  }
}

std::string ConfigFile::serialize() const {
  std::ostringstream os;
  for (const auto& [name, entries] : sections_) {
    os << "[" << name << "]\n";
    for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    os << "\n";
  }
  return os.str();
}

namespace {

Matrix3d rpy_to_rotation(const Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

RobotModel load_robot_model(const std::string& path) {
  const ConfigFile cfg = ConfigFile::load(path);
  RobotModel model;
  const int n = cfg.get_int_or("robot", "n", 0);
  if (n < 1) throw ConfigError(path + ": robot.n must be >= 1");
  if (cfg.has("robot", "gravity_mps2")) {
    model.gravity = cfg.get_vec3("robot", "gravity_mps2");
  }
  for (int i = 0; i < n; ++i) {
    const std::string js = "joint" + std::to_string(i);
    const std::string ls = "link" + std::to_string(i);
    JointDescription j;
    j.axis = cfg.get_vec3(js, "axis");
    j.offset_p = cfg.get_vec3(js, "offset_xyz_m");
    if (cfg.has(js, "offset_rpy_rad")) {
      j.offset_R = rpy_to_rotation(cfg.get_vec3(js, "offset_rpy_rad"));
    }
    LinkInertia l;
    l.mass = cfg.get_double(ls, "mass_kg");
    l.com = cfg.get_vec3(ls, "com_m");
    const VectorXd I = cfg.get_vector(ls, "inertia_kgm2");
    if (I.size() != 6) {
      throw ConfigError(path + ": " + ls +
                        ".inertia_kgm2 needs ixx iyy izz ixy ixz iyz");
    }
    l.inertia << I[0], I[3], I[4], I[3], I[1], I[5], I[4], I[5], I[2];
    model.joints.push_back(j);
    model.links.push_back(l);
  }
  if (cfg.has("ee", "offset_xyz_m")) {
    model.ee_offset_p = cfg.get_vec3("ee", "offset_xyz_m");
  }
  if (cfg.has("ee", "offset_rpy_rad")) {
    model.ee_offset_R = rpy_to_rotation(cfg.get_vec3("ee", "offset_rpy_rad"));
  }
  cfg.ensure_all_consumed();
  try {
    model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model;
}

ForceReference parse_force_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = spec.substr(colon + 1);
    for (auto& c : rest) {
      if (c == ',') c = ' ';
    }
    for (const auto& t : tokens(rest)) args.push_back(std::stod(t));
  }
  if (kind == "step") {
    if (args.size() != 1) throw ConfigError("force: step needs one value");
    return StepForce{args[0]};
  }
  if (kind == "sine") {
    if (args.size() != 3) {
      throw ConfigError("force: sine needs amp, period, offset");
    }
    return SinusoidForce{args[0], args[1], args[2]};
  }
  throw ConfigError("force: unknown kind '" + kind + "'");
}

LoadedConfig load_scenario_config(const std::string& path) {
  const ConfigFile cfg = ConfigFile::load(path);
  const fs::path base = fs::path(path).parent_path();
  LoadedConfig out;
  Scenario& scn = out.scenario;

  const std::string builtin = cfg.get_string_or("robot", "builtin", "");
  if (!builtin.empty()) {
    if (builtin == "arm6") scn.robot = make_arm_6dof();
    else if (builtin == "planar2r") scn.robot = make_planar_2r();
    else throw ConfigError(path + ": robot.builtin must be arm6 or planar2r");
  } else {
    const std::string file = cfg.get_string("robot", "file");
    scn.robot = load_robot_model((base / file).string());
  }
  const int n = scn.robot.n();

  const std::string axis = cfg.get_string_or("contact", "constrained_axis",
                                             "z");
  scn.contact.constrained_axis = axis == "x" ? 0 : axis == "y" ? 1 : 2;
  scn.contact.basis_sign = cfg.get_double_or("contact", "basis_sign", -1.0);
  scn.contact.mu = cfg.get_double_or("contact", "mu", 0.5);
  scn.contact.f_u_model.k_viscous =
      cfg.get_double_or("contact", "k_viscous_Nspm", 5.0);
  scn.contact.force_filter_hz =
      cfg.get_double_or("contact", "force_filter_hz", 100.0);

  GainSet g = GainSet::scenario_defaults(n, 2, 1);
  auto diag = [&](const char* key, VectorXd& target) {
    if (cfg.has("gains", key)) {
      target.setConstant(cfg.get_double("gains", key));
    }
  };
  diag("kq_p", g.Kq_P);
  diag("kq_d", g.Kq_D);
  diag("ku_p", g.Ku_P);
  diag("ku_d", g.Ku_D);
  if (cfg.has("gains", "kr_p")) g.KR_P.setConstant(cfg.get_double("gains", "kr_p"));
  if (cfg.has("gains", "kr_d")) g.KR_D.setConstant(cfg.get_double("gains", "kr_d"));
  diag("kc_p", g.Kc_P);
  diag("kc_i", g.Kc_I);
  g.integral_clamp = cfg.get_double_or("gains", "integral_clamp_Ns", 20.0);
  scn.gains = g;

  if (cfg.has("gains", "stiffness_schedule")) {
    // Learned schedule replaces K_u^P / K_R^P (+ critical damping); the
    // scenario uses its mid-sweep sample.
    const auto sched = load_stiffness_schedule(
        (base / cfg.get_string("gains", "stiffness_schedule")).string());
    if (!sched.samples.empty()) {
      const auto& s = sched.samples[sched.samples.size() / 2];
      if (s.K_P.size() >= 6) {
        scn.gains.Ku_P.setConstant(s.K_P.head(3).mean());
        scn.gains.Ku_D.setConstant(s.K_D.head(3).mean());
        scn.gains.KR_P.setConstant(s.K_P.tail(3).mean());
        scn.gains.KR_D.setConstant(s.K_D.tail(3).mean());
      }
    }
  }

  if (cfg.has("weights", "w")) {
    const VectorXd w = cfg.get_vector("weights", "w");
    if (w.size() != 4) throw ConfigError(path + ": weights.w needs 4 values");
    scn.weights = {w[0], w[1], w[2], w[3]};
  }

  scn.bounds = ControlBounds::defaults(
      n, 1, cfg.get_double_or("bounds", "tau_max_Nm", 50.0),
      cfg.get_double_or("bounds", "f_c_max_N", 60.0));

  if (cfg.has("scenario", "board_point_m")) {
    scn.board.point = cfg.get_vec3("scenario", "board_point_m");
  }
  if (cfg.has("scenario", "board_normal")) {
    scn.board.normal = cfg.get_vec3("scenario", "board_normal");
  }
  if (cfg.has("scenario", "start_m")) {
    scn.start_pose = cfg.get_vec3("scenario", "start_m");
  }
  if (cfg.has("scenario", "end_m")) {
    scn.end_pose = cfg.get_vec3("scenario", "end_m");
  }
  scn.sweep_speed = cfg.get_double_or("scenario", "sweep_speed_mps", 0.05);
  scn.duration = cfg.get_double_or("scenario", "duration_s", 6.0);
  scn.control_rate = cfg.get_double_or("scenario", "control_rate_hz", 1000.0);
  scn.force_ramp_time = cfg.get_double_or("scenario", "force_ramp_s", 0.2);
  scn.baumgarte.alpha = cfg.get_double_or("scenario", "baumgarte_alpha", 20.0);
  scn.baumgarte.beta = cfg.get_double_or("scenario", "baumgarte_beta", 20.0);
  scn.seed = (unsigned)cfg.get_int_or("scenario", "seed", 0);
  if (cfg.has("scenario", "force")) {
    scn.force_reference = parse_force_spec(cfg.get_string("scenario", "force"));
  }
  // The sweep orientation comes from the board geometry.
  scn.R_E_d = surface_normal_orientation(
      scn.board.normal, (scn.end_pose - scn.start_pose).normalized());

  if (cfg.has("guidance", "spine_amplitude_m") ||
      cfg.has("guidance", "bmi")) {
    out.has_guidance = true;
    auto& gd = out.guidance;
    gd.spine.amplitude =
        cfg.get_double_or("guidance", "spine_amplitude_m", 0.008);
    gd.spine.wavelength =
        cfg.get_double_or("guidance", "spine_wavelength_m", 0.06);
    gd.render.noise_std = cfg.get_double_or("guidance", "noise_std", 0.0);
    gd.lateral.gain = cfg.get_double_or("guidance", "gain_lat", 8.0);
    gd.guidance_rate = cfg.get_double_or("guidance", "guidance_rate_hz", 30.0);
    gd.bmi = cfg.get_double_or("guidance", "bmi", 22.0);
    gd.noise_seed = (unsigned)cfg.get_int_or("guidance", "seed", 0);
  }

  auto& lc = out.learn;
  lc.K = cfg.get_int_or("impedance", "K", 4);
  lc.em.tol = cfg.get_double_or("impedance", "tol", 1e-4);
  lc.em.max_iter = cfg.get_int_or("impedance", "max_iter", 500);
  lc.em.seed = (unsigned)cfg.get_int_or("impedance", "seed", 0);
  lc.stiffness.k_min = cfg.get_double_or("impedance", "k_min", 50.0);
  lc.stiffness.k_max = cfg.get_double_or("impedance", "k_max", 1000.0);
  lc.stiffness.scale = cfg.get_double_or("impedance", "scale", 0.02);
  lc.aligned_n = cfg.get_int_or("impedance", "aligned_n", 200);

  cfg.ensure_all_consumed();
  return out;
}

QPProblem load_qp_problem(const std::string& path) {
  const ConfigFile cfg = ConfigFile::load(path);
  QPProblem p;
  const int d = cfg.get_int_or("qp", "d", 0);
  const int m = cfg.get_int_or("qp", "m", 0);
  const int pe = cfg.get_int_or("qp", "p", 0);
  if (d < 1) throw ConfigError(path + ": qp.d must be >= 1");
  auto mat = [&](const char* key, int rows, int cols) {
    MatrixXd M = MatrixXd::Zero(rows, cols);
    if (rows == 0) return M;
    const VectorXd v = cfg.get_vector("qp", key);
    if (v.size() != rows * cols) {
      throw ConfigError(path + ": qp." + std::string(key) +
                        ": expected " + std::to_string(rows * cols) +
                        " entries (row-major)");
    }
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) M(i, j) = v[i * cols + j];
    }
    return M;
  };
  p.P_c = mat("P", d, d);
  p.q_c = mat("q", d, 1);
  p.L = mat("L", m, d);
  p.h = mat("h", m, 1);
  p.D = mat("D", pe, d);
  p.z = mat("z", pe, 1);
  cfg.ensure_all_consumed();
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

std::string trajectory_csv_header(int n) {
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < n; ++i) os << ",q" << i;
  for (int i = 0; i < n; ++i) os << ",qd" << i;
  os << ",fx_c,fd_c,ex,ey,ez";
  for (int i = 0; i < n; ++i) os << ",tau" << i;
  os << ",qp_iters,qp_status,resid_w";
  return os.str();
}

void write_trajectory_csv(const TrajectoryLog& log, int n,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write log file: " + path);
  out << trajectory_csv_header(n) << "\n";
  out.precision(12);
  for (const auto& r : log.records) {
    out << r.t;
    for (int i = 0; i < n; ++i) out << "," << r.q[i];
    for (int i = 0; i < n; ++i) out << "," << r.qdot[i];
    out << "," << r.f_c_true[0] << "," << r.f_c_d[0] << "," << r.rot_err.x()
        << "," << r.rot_err.y() << "," << r.rot_err.z();
    for (int i = 0; i < n; ++i) out << "," << r.tau[i];
    out << "," << r.qp_iterations << "," << to_string(r.qp_status) << ","
        << r.residual_w << "\n";
  }
}

void write_demo_set(const DemoSet& set, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.cfg");
  manifest << "[demos]\n";
  manifest << "sample_period_s = " << set.sample_period << "\n";
  manifest << "count = " << set.demos.size() << "\n";
  for (size_t m = 0; m < set.demos.size(); ++m) {
    const std::string name = "demo" + std::to_string(m) + ".csv";
    std::ofstream out(fs::path(dir) / name);
    out.precision(12);
    const auto& d = set.demos[m];
    out << "t";
    for (int j = 0; j < d.x.cols(); ++j) out << ",x" << j;
    out << "\n";
    for (int i = 0; i < d.x.rows(); ++i) {
      out << d.t[i];
      for (int j = 0; j < d.x.cols(); ++j) out << "," << d.x(i, j);
      out << "\n";
    }
  }
}

DemoSet load_demo_set(const std::string& dir) {
  const ConfigFile manifest =
      ConfigFile::load((fs::path(dir) / "manifest.cfg").string());
  DemoSet set;
  set.sample_period = manifest.get_double("demos", "sample_period_s");
  const int count = manifest.get_int_or("demos", "count", 0);
  manifest.ensure_all_consumed();
  for (int m = 0; m < count; ++m) {
    const fs::path file = fs::path(dir) / ("demo" + std::to_string(m) + ".csv");
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open demo file: " + file.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      std::vector<double> row;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty demo file: " + file.string());
    Demonstration d;
    const int N = (int)rows.size();
    const int D = (int)rows[0].size() - 1;
    d.t.resize(N);
    d.x.resize(N, D);
    for (int i = 0; i < N; ++i) {
      d.t[i] = rows[i][0];
      for (int j = 0; j < D; ++j) d.x(i, j) = rows[i][j + 1];
    }
    set.demos.push_back(std::move(d));
  }
  set.validate();
  return set;
}

void write_stiffness_schedule(const StiffnessSchedule& sched,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write schedule: " + path);
  if (sched.samples.empty()) throw ConfigError("empty stiffness schedule");
  const int D = (int)sched.samples[0].K_P.size();
  out << "t";
  for (int j = 0; j < D; ++j) out << ",kp" << j;
  for (int j = 0; j < D; ++j) out << ",kd" << j;
  out << "\n";
  out.precision(12);
  for (const auto& s : sched.samples) {
    out << s.t;
    for (int j = 0; j < D; ++j) out << "," << s.K_P[j];
    for (int j = 0; j < D; ++j) out << "," << s.K_D[j];
    out << "\n";
  }
}

StiffnessSchedule load_stiffness_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule: " + path);
  std::string line;
  std::getline(in, line);
  const int cols = (int)std::count(line.begin(), line.end(), ',') + 1;
  const int D = (cols - 1) / 2;
  StiffnessSchedule sched;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    StiffnessSample s;
    s.t = row[0];
    s.K_P = Eigen::Map<VectorXd>(row.data() + 1, D);
    s.K_D = Eigen::Map<VectorXd>(row.data() + 1 + D, D);
    sched.samples.push_back(std::move(s));
  }
  return sched;
}

}  // namespace hybridctl
