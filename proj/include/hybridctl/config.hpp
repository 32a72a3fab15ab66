#pragma once

#include <map>
#include <set>
#include <string>

#include "hybridctl/guidance.hpp"
#include "hybridctl/impedance.hpp"
#include "hybridctl/simulator.hpp"

namespace hybridctl {

// Raised with a path-precise message ("section.key: ...") on any config
// problem.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordered key-value text with [section] headers; values are whitespace
// separated tokens. Unknown keys are rejected by ensure_all_consumed().
class ConfigFile {
 public:
  static ConfigFile load(const std::string& path);
  static ConfigFile parse(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key)
      const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  int get_int_or(const std::string& section, const std::string& key,
                 int fallback) const;
  VectorXd get_vector(const std::string& section, const std::string& key)
      const;
  Vector3d get_vec3(const std::string& section, const std::string& key) const;

  // Throws ConfigError naming the first unread key.
  void ensure_all_consumed() const;
  std::string serialize() const;

  const std::vector<std::pair<std::string,
                              std::vector<std::pair<std::string, std::string>>>>&
  sections() const {
    return sections_;
  }

 private:
  std::string origin_;
  std::vector<
      std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
      sections_;
  mutable std::set<std::string> consumed_;

  const std::string* find(const std::string& section,
                          const std::string& key) const;
};

RobotModel load_robot_model(const std::string& path);

struct GuidanceScenario {
  SpineCurve spine;
  LateralGuidanceConfig lateral;
  HeatmapRenderConfig render;
  double guidance_rate = 30.0;  // Hz
  double bmi = 22.0;
  ForceLookupConfig force_lookup;
  unsigned noise_seed = 0;
};

struct LearnConfig {
  int K = 4;
  EMOptions em;
  StiffnessMapOptions stiffness;
  int aligned_n = 200;
};

struct LoadedConfig {
  Scenario scenario;
  GuidanceScenario guidance;
  LearnConfig learn;
  bool has_guidance = false;
};

// base_dir resolves relative robot/schedule file references.
LoadedConfig load_scenario_config(const std::string& path);

QPProblem load_qp_problem(const std::string& path);

// CSV header:
// t,q0..q{n-1},qd0..qd{n-1},fx_c,fd_c,ex,ey,ez,tau0..tau{n-1},
// qp_iters,qp_status,resid_w
std::string trajectory_csv_header(int n);
void write_trajectory_csv(const TrajectoryLog& log, int n,
                          const std::string& path);

void write_demo_set(const DemoSet& set, const std::string& dir);
DemoSet load_demo_set(const std::string& dir);

void write_stiffness_schedule(const StiffnessSchedule& sched,
                              const std::string& path);
StiffnessSchedule load_stiffness_schedule(const std::string& path);

// "step:15" | "sine:5,6,10" (amp, period, offset) overrides.
ForceReference parse_force_spec(const std::string& spec);

}  // namespace hybridctl
