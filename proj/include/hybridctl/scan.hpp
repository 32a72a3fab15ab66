#pragma once

#include "hybridctl/config.hpp"

namespace hybridctl {

struct ScanResult {
  TrajectoryLog log;
  std::vector<std::pair<double, double>> deviation_px;  // (t, u_px - center)
  std::vector<std::pair<double, double>> lateral_cmd;   // (t, m/s)
  double max_abs_deviation_px_after(double t) const;
  double max_abs_lateral_cmd() const;
};

/// Closed guidance loop: synthetic heatmaps steer the lateral reference while
// the sweep and force tasks run as in run_scenario. The force reference comes
// from the BMI lookup unless the scenario sets one explicitly.
ScanResult run_scan(const LoadedConfig& cfg);

}  // namespace hybridctl
