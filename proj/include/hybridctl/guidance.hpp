#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hybridctl {

using Eigen::Matrix3d;
using Eigen::Vector3d;

struct Heatmap {
  int width = 640;
  int height = 480;
  std::vector<double> values;  // row-major, nonnegative
  double confidence = 1.0;     // [0, 1]

  double& at(int row, int col) { return values[row * width + col]; }
  double at(int row, int col) const { return values[row * width + col]; }
};

struct Detection {
  double u_px = 0;  // pixel column of the detected spinous process
  double confidence = 0;
};

// Column of the global maximum; centroid of the max-intensity columns on
// ties. All-zero map: center column with confidence 0.
Detection detect_spinous(const Heatmap& hm);

struct LateralGuidanceConfig {
  double px_to_m = 0.08 / 640;  // 80 mm aperture over 640 columns
  double gain = 8.0;            // 1/s
  double v_max = 0.02;          // m/s clamp
  double confidence_threshold = 0.5;
  double dropout_tau = 0.5;     // s, decay of the held command
};

// v_lat = gain * px_to_m * (u_px - width/2), clamped.
double lateral_reference(double u_px, int image_width,
                         const LateralGuidanceConfig& cfg);

// Constant sweep velocity (m/s).
double sweep_reference(double speed = 0.003);

// Probe axis (third column) along -normal; first column opposite the
// tangent-plane projection of sweep_dir; right-handed completion.
// Throws if sweep_dir is (near) parallel to normal.
Matrix3d surface_normal_orientation(const Vector3d& normal,
                                    const Vector3d& sweep_dir);

struct ForceLookupConfig {
  // (bmi, N) anchors; forces are the 7/10/15 N experiment values, the BMI
  // breakpoints are configurable.
  std::vector<std::pair<double, double>> anchors = {
      {17.0, 7.0}, {22.0, 10.0}, {30.0, 15.0}};
};

// Piecewise-linear lookup, clamped at the end anchors. bmi <= 0 throws.
double force_reference(double bmi, const ForceLookupConfig& cfg = {});

// Lateral offset of the spine as a function of sweep progress (m -> m).
struct SpineCurve {
  double amplitude = 0.008;   // m
  double wavelength = 0.06;   // m
  double phase = 0.0;

  double offset(double s) const;  // lateral offset at sweep coordinate s
};

struct HeatmapRenderConfig {
  int width = 640;
  int height = 480;
  double px_to_m = 0.08 / 640;
  double bump_sigma_px = 12.0;
  double noise_std = 0.0;
  double aperture = 0.08;  // m; confidence decays beyond it
};

// Renders a Gaussian bump at the column matching the curve's lateral offset
// relative to the probe, with seeded additive noise.
Heatmap synthetic_heatmap(const SpineCurve& curve, double sweep_s,
                          double probe_lateral, const HeatmapRenderConfig& cfg,
                          unsigned noise_seed);

// Dropout-hold state: below the confidence threshold the last command is
// held and decayed exponentially.
class LateralGuidance {
 public:
  explicit LateralGuidance(LateralGuidanceConfig cfg) : cfg_(cfg) {}
  double update(const Detection& det, int image_width, double dt);

 private:
  LateralGuidanceConfig cfg_;
  double held_ = 0;
};

}  // namespace hybridctl
