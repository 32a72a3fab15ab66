#include "hybridctl/scan.hpp"

#include <cmath>
#include <memory>

namespace hybridctl {

double ScanResult::max_abs_deviation_px_after(double t0) const {
  double mx = 0;
  for (const auto& [t, d] : deviation_px) {
    if (t >= t0) mx = std::max(mx, std::abs(d));
  }
  return mx;
}

double ScanResult::max_abs_lateral_cmd() const {
  double mx = 0;
  for (const auto& [t, v] : lateral_cmd) mx = std::max(mx, std::abs(v));
  return mx;
}

ScanResult run_scan(const LoadedConfig& cfg) {
  Scenario scn = cfg.scenario;
  const GuidanceScenario& gd = cfg.guidance;
  scn.force_reference = StepForce{force_reference(gd.bmi, gd.force_lookup)};

  ScanResult result;
  LateralGuidance lateral(gd.lateral);

  // Frames: the sweep runs along +z, the spine's lateral offset along +y,
  // the board along x. The guidance output is a lateral velocity whose
  // integral shifts the reference line sideways.
  const Vector3d lateral_dir(0, 1, 0);
  const double dt = 1.0 / scn.control_rate;
  const double guidance_period = 1.0 / gd.guidance_rate;
  const Vector3d start = scn.start_pose;

  struct HookState {
    double next_update = 0;
    double v_lat = 0;
    double y_ref = 0;
    unsigned frame = 0;
  };
  auto hs = std::make_shared<HookState>();

  const auto hook = [&, hs](double t, const EndEffectorPose& pose,
                            TaskReference& ref) {
    if (t >= hs->next_update) {
      hs->next_update = t + guidance_period;
      const double sweep_s = pose.p_E.z() - start.z();
      const double probe_lateral = lateral_dir.dot(pose.p_E - start);
      const Heatmap hm =
          synthetic_heatmap(gd.spine, sweep_s, probe_lateral, gd.render,
                            gd.noise_seed + hs->frame++);
      const Detection det = detect_spinous(hm);
      hs->v_lat = lateral.update(det, hm.width, guidance_period);
      result.deviation_px.emplace_back(t, det.u_px - hm.width / 2.0);
      result.lateral_cmd.emplace_back(t, hs->v_lat);
    }
    hs->y_ref += hs->v_lat * dt;

    // Shift the reference sideways; p_u coordinates follow the same
    // projection the controller uses (R_E_d * B_u linear columns).
    const Vector3d shift = hs->y_ref * lateral_dir;
    const Vector3d vshift = hs->v_lat * lateral_dir;
    // Under the default bases u_dirs = [(0,0,-1), (0,1,0)]; recompute
    // generically from the reference values already projected on the line.
    const Matrix3d& R = ref.R_E_d;
    Eigen::Matrix<double, 3, 2> u_dirs;
    u_dirs.col(0) = R.col(0);
    u_dirs.col(1) = R.col(1);
    ref.p_u_d += u_dirs.transpose() * shift;
    ref.pdot_u_d += u_dirs.transpose() * vshift;
  };
  result.log = run_scenario(scn, hook);
  return result;
}

}  // namespace hybridctl
