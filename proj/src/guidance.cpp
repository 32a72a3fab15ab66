#include "hybridctl/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hybridctl {

Detection detect_spinous(const Heatmap& hm) {
  Detection det;
  const double mx = hm.values.empty()
                        ? 0.0
                        : *std::max_element(hm.values.begin(), hm.values.end());
  if (mx <= 0.0) {
    det.u_px = hm.width / 2.0;
    det.confidence = 0.0;
    return det;
  }
  // Centroid over the columns attaining the maximum (ties included).
  double sum = 0, count = 0;
  for (int r = 0; r < hm.height; ++r) {
    for (int c = 0; c < hm.width; ++c) {
      if (hm.at(r, c) >= mx * (1.0 - 1e-12)) {
        sum += c;
        count += 1;
      }
    }
  }
  det.u_px = sum / count;
  det.confidence = hm.confidence;
  return det;
}

double lateral_reference(double u_px, int image_width,
                         const LateralGuidanceConfig& cfg) {
  if (cfg.gain <= 0) throw std::invalid_argument("lateral gain must be > 0");
  const double v = cfg.gain * cfg.px_to_m * (u_px - image_width / 2.0);
  return std::clamp(v, -cfg.v_max, cfg.v_max);
}

double sweep_reference(double speed) { return speed; }

Matrix3d surface_normal_orientation(const Vector3d& normal,
                                    const Vector3d& sweep_dir) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("normal must be unit length");
  }
  const Vector3d tangent =
      sweep_dir - normal * normal.dot(sweep_dir);
  if (tangent.norm() < 1e-9) {
    throw std::invalid_argument("sweep direction parallel to surface normal");
  }
  Matrix3d R;
  R.col(2) = -normal;
  R.col(0) = -tangent.normalized();
  R.col(1) = R.col(2).cross(R.col(0));
  return R;
}

double force_reference(double bmi, const ForceLookupConfig& cfg) {
  if (bmi <= 0) throw std::invalid_argument("bmi must be > 0");
  const auto& a = cfg.anchors;
  if (bmi <= a.front().first) return a.front().second;
  if (bmi >= a.back().first) return a.back().second;
  for (size_t i = 1; i < a.size(); ++i) {
    if (bmi <= a[i].first) {
      const double w = (bmi - a[i - 1].first) / (a[i].first - a[i - 1].first);
      return a[i - 1].second + w * (a[i].second - a[i - 1].second);
    }
  }
  return a.back().second;
}

double SpineCurve::offset(double s) const {
  return amplitude * std::sin(2 * M_PI * s / wavelength + phase);
}

Heatmap synthetic_heatmap(const SpineCurve& curve, double sweep_s,
                          double probe_lateral, const HeatmapRenderConfig& cfg,
                          unsigned noise_seed) {
  Heatmap hm;
  hm.width = cfg.width;
  hm.height = cfg.height;
  hm.values.assign((size_t)cfg.width * cfg.height, 0.0);

  const double offset = curve.offset(sweep_s) - probe_lateral;  // m
  const double col = cfg.width / 2.0 + offset / cfg.px_to_m;
  hm.confidence =
      std::clamp(1.0 - std::max(0.0, std::abs(offset) - cfg.aperture / 2) /
                           (cfg.aperture / 2),
                 0.0, 1.0);

  std::mt19937 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  const int row0 = cfg.height / 2;
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      const double dr = (r - row0) / (4.0 * cfg.bump_sigma_px);
      const double dc = (c - col) / cfg.bump_sigma_px;
      double v = std::exp(-0.5 * (dr * dr + dc * dc));
      if (cfg.noise_std > 0) v += noise(rng);
      hm.at(r, c) = std::max(0.0, v);
    }
  }
  return hm;
}

double LateralGuidance::update(const Detection& det, int image_width,
                               double dt) {
  if (det.confidence < cfg_.confidence_threshold) {
    held_ *= std::exp(-dt / cfg_.dropout_tau);
    return held_;
  }
  held_ = lateral_reference(det.u_px, image_width, cfg_);
  return held_;
}

}  // namespace hybridctl
