#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "hybridctl/scan.hpp"

using namespace hybridctl;

namespace {

bool verbose() {
  const char* v = std::getenv("HYBRIDCTL_LOG");
  return v && std::string(v) != "" && std::string(v) != "0";
}

struct SimSummary {
  double max_force_err = 0;
  double rms_force_err = 0;
  double final_pos_err = 0;
  double max_rot_err = 0;
  double mean_qp_iters = 0;
  int max_qp_iters = 0;
  int fallbacks = 0;
};

SimSummary summarize(const TrajectoryLog& log, const Scenario& scn,
                     double transient = 0.5) {
  SimSummary s;
  double sq = 0;
  int count = 0;
  long iters = 0;
  for (const auto& r : log.records) {
    iters += r.qp_iterations;
    s.max_qp_iters = std::max(s.max_qp_iters, r.qp_iterations);
    s.max_rot_err = std::max(s.max_rot_err, r.rot_err.norm());
    if (r.t < transient) continue;
    const double e = (r.f_c_true - r.f_c_d).lpNorm<Eigen::Infinity>();
    s.max_force_err = std::max(s.max_force_err, e);
    sq += e * e;
    ++count;
  }
  s.rms_force_err = count ? std::sqrt(sq / count) : 0;
  s.mean_qp_iters =
      log.records.empty() ? 0 : double(iters) / log.records.size();
  s.fallbacks = log.fallback_events;
  if (!log.records.empty()) {
    s.final_pos_err = (log.records.back().pose.p_E - scn.end_pose).norm();
  }
  return s;
}

void print_summary(const std::string& name, const SimSummary& s) {
  std::cout << name << ": max|f-fd| = " << s.max_force_err
            << " N, rms = " << s.rms_force_err
            << " N, final pose err = " << s.final_pos_err
            << " m, max|e_R| = " << s.max_rot_err
            << " rad, qp iters mean/max = " << s.mean_qp_iters << "/"
            << s.max_qp_iters << ", fallbacks = " << s.fallbacks << "\n";
}

int run_simulate(const std::vector<std::string>& configs,
                 const std::string& force_override, const std::string& out,
                 bool paper_literal, int jobs) {
  std::atomic<int> worst_exit{0};
  std::mutex io;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < configs.size(); i = next++) {
      try {
        LoadedConfig cfg = load_scenario_config(configs[i]);
        if (!force_override.empty()) {
          cfg.scenario.force_reference = parse_force_spec(force_override);
        }
        cfg.scenario.paper_literal_constraint = paper_literal;
        const TrajectoryLog log = run_scenario(cfg.scenario);
        std::string path = out;
        if (path.empty() || configs.size() > 1) {
          path = configs[i] + ".log.csv";
        }
        write_trajectory_csv(log, cfg.scenario.robot.n(), path);
        std::lock_guard<std::mutex> lk(io);
        print_summary(configs[i], summarize(log, cfg.scenario));
        if (verbose()) std::cout << "  log written to " << path << "\n";
      } catch (const ConfigError& e) {
        std::lock_guard<std::mutex> lk(io);
        std::cerr << "config error: " << e.what() << "\n";
        worst_exit = std::max(worst_exit.load(), 2);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(io);
        std::cerr << "simulation failed: " << e.what() << "\n";
        worst_exit = std::max(worst_exit.load(), 3);
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::max(1, std::min<int>(jobs, (int)configs.size()));
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return worst_exit;
}

int run_learn(const std::string& demos_dir, const std::string& config,
              const std::string& out, bool synthesize) {
  try {
    LearnConfig lc;
    if (!config.empty()) lc = load_scenario_config(config).learn;
    if (synthesize) {
      write_demo_set(synthesize_demos(), demos_dir);
      std::cout << "wrote synthetic demo set to " << demos_dir << "\n";
    }
    const DemoSet raw = load_demo_set(demos_dir);
    if (raw.demos.size() < 2) {
      std::cerr << "config error: need at least 2 demonstrations\n";
      return 2;
    }
    const DemoSet aligned = dtw_align(raw, lc.aligned_n);
    MatrixXd data(aligned.demos.size() * lc.aligned_n, aligned.dim() + 1);
    int row = 0;
    for (const auto& d : aligned.demos) {
      for (int i = 0; i < d.x.rows(); ++i) {
        data(row, 0) = d.t[i];
        data.row(row).tail(aligned.dim()) = d.x.row(i);
        ++row;
      }
    }
    EMReport report;
    const GMMModel gmm = em_fit(data, lc.K, lc.em, &report);
    const double t1 = aligned.demos[0].t[lc.aligned_n - 1];
    const StiffnessSchedule sched =
        make_stiffness_schedule(gmm, 0.0, t1, lc.stiffness);
    write_stiffness_schedule(sched, out);
    std::cout << "fit report: K = " << gmm.K
              << ", iterations = " << gmm.iterations
              << ", final avg log-likelihood = " << gmm.final_avg_loglik
              << "\n";
    std::cout << "schedule written to " << out << " (" << sched.samples.size()
              << " samples)\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "learn failed: " << e.what() << "\n";
    return 3;
  }
}

int run_scan_cmd(const std::string& config, const std::string& out) {
  try {
    const LoadedConfig cfg = load_scenario_config(config);
    if (!cfg.has_guidance) {
      std::cerr << "config error: " << config << ": missing [guidance]\n";
      return 2;
    }
    const ScanResult result = run_scan(cfg);
    write_trajectory_csv(result.log, cfg.scenario.robot.n(),
                         out.empty() ? config + ".log.csv" : out);
    print_summary(config, summarize(result.log, cfg.scenario));
    std::cout << "centering: max |deviation| after 2 s = "
              << result.max_abs_deviation_px_after(2.0)
              << " px, max |lateral cmd| = " << result.max_abs_lateral_cmd()
              << " m/s\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "scan failed: " << e.what() << "\n";
    return 3;
  }
}

int run_qp_check(const std::string& file) {
  try {
    const QPProblem prob = load_qp_problem(file);
    const QPSolution sol = solve_qp(prob);
    std::cout << "status: " << to_string(sol.status) << "\n";
    if (sol.status == QPStatus::optimal) {
      std::cout << "u = [" << sol.u.transpose() << "]\n";
      std::cout << "lambda = [" << sol.lambda_ineq.transpose() << "]\n";
      std::cout << "nu = [" << sol.nu_eq.transpose() << "]\n";
      std::cout << "kkt: stationarity = " << sol.kkt.stationarity
                << ", primal_eq = " << sol.kkt.primal_eq
                << ", primal_ineq = " << sol.kkt.primal_ineq
                << ", complementarity = " << sol.kkt.complementarity << "\n";
      std::cout << "iterations = " << sol.iterations << "\n";
      return 0;
    }
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qp-check failed: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid force/motion controller: simulation, learning, scan"};
  app.require_subcommand(1);

  std::vector<std::string> sim_configs;
  std::string force_override, sim_out;
  bool paper_literal = false;
  int jobs = 1;
  auto* sim = app.add_subcommand("simulate", "run a board-sliding scenario");
  sim->add_option("config", sim_configs, "scenario config file(s)")
      ->required();
  sim->add_option("--force", force_override,
                  "override force reference (step:15 | sine:5,6,10)");
  sim->add_option("--out", sim_out, "trajectory CSV path");
  sim->add_flag("--paper-literal-constraint", paper_literal,
                "use the literal printed equality row");
  sim->add_option("--jobs", jobs, "parallel workers for a config matrix");

  std::string demos_dir, learn_config, learn_out = "schedule.csv";
  bool synthesize = false;
  auto* learn = app.add_subcommand("learn",
                                   "fit variable impedance gains from demos");
  learn->add_option("demos", demos_dir, "demo set directory")->required();
  learn->add_option("--config", learn_config, "config with [impedance]");
  learn->add_option("--out", learn_out, "stiffness schedule CSV");
  learn->add_flag("--synthesize", synthesize,
                  "generate the bundled synthetic demo set first");

  std::string scan_config, scan_out;
  auto* scan = app.add_subcommand("scan", "guided sweep over a spine curve");
  scan->add_option("config", scan_config, "scan config file")->required();
  scan->add_option("--out", scan_out, "trajectory CSV path");

  std::string qp_file;
  auto* qpc = app.add_subcommand("qp-check", "solve a QP from a problem file");
  qpc->add_option("problem", qp_file, "problem file")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    return run_simulate(sim_configs, force_override, sim_out, paper_literal,
                        jobs);
  }
  if (learn->parsed()) {
    return run_learn(demos_dir, learn_config, learn_out, synthesize);
  }
  if (scan->parsed()) return run_scan_cmd(scan_config, scan_out);
  if (qpc->parsed()) return run_qp_check(qp_file);
  return 1;
}
