#pragma once

#include <cstdint>
#include <string>

#include "motrack/rng.hpp"
#include "motrack/types.hpp"

namespace motrack {

/// Controls for the synthetic driving-scene generator. Objects move with
/// smoothly varying heading and speed, spawn to keep roughly `objects` alive,
/// and despawn when they leave the image. Detections are derived from the
/// ground truth by deterministic occlusion dropout (when two boxes overlap
/// beyond `occlusion_iou`, the one higher in the image disappears), random
/// missed detections, Gaussian box noise and uniform clutter.
struct SyntheticConfig {
  int frames = 300;
  int objects = 8;
  int width = 1920;
  int height = 1080;
  double speed_min = 0.002;
  double speed_max = 0.01;
  double accel_noise = 0.0005;
  double turn_noise = 0.08;
  double size_min = 0.05;
  double size_max = 0.15;
  double size_drift = 0.002;
  double spawn_prob = 0.05;
  double occlusion_iou = 0.3;
  double fn_rate = 0.15;
  double fp_rate = 0.05;
  double jitter_sigma = 0.01;
};

Sequence generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed,
                            const std::string& name);

}  // namespace motrack
