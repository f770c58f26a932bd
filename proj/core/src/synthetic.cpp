#include "motrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "motrack/errors.hpp"

namespace motrack {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kExitMargin = 0.05;

struct Object {
  int id = 0;
  bool alive = true;
  double x = 0, y = 0;
  double heading = 0, speed = 0;
  double w = 0, h = 0;
};

Object spawn_object(int id, const SyntheticConfig& cfg, Rng& rng) {
  Object o;
  o.id = id;
  o.x = rng.uniform(0.15, 0.85);
  o.y = rng.uniform(0.15, 0.85);
  o.heading = rng.uniform(0.0, 2.0 * kPi);
  o.speed = rng.uniform(cfg.speed_min, cfg.speed_max);
  o.w = rng.uniform(cfg.size_min, cfg.size_max);
  o.h = rng.uniform(cfg.size_min, cfg.size_max);
  return o;
}

void step_object(Object& o, const SyntheticConfig& cfg, Rng& rng) {
  o.heading += rng.normal(0.0, cfg.turn_noise);
  o.speed = std::clamp(o.speed + rng.normal(0.0, cfg.accel_noise), cfg.speed_min, cfg.speed_max);
  o.x += o.speed * std::cos(o.heading);
  o.y += o.speed * std::sin(o.heading);
  o.w = std::clamp(o.w * (1.0 + rng.normal(0.0, cfg.size_drift)), cfg.size_min, cfg.size_max);
  o.h = std::clamp(o.h * (1.0 + rng.normal(0.0, cfg.size_drift)), cfg.size_min, cfg.size_max);
  if (o.x < -kExitMargin || o.x > 1.0 + kExitMargin || o.y < -kExitMargin ||
      o.y > 1.0 + kExitMargin)
    o.alive = false;
}

Detection to_box(const Object& o, int frame) {
  Detection d;
  d.frame = frame;
  d.x = o.x;
  d.y = o.y;
  d.w = o.w;
  d.h = o.h;
  d.id = o.id;
  return d;
}

}  // namespace

Sequence generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed,
                            const std::string& name) {
  if (cfg.frames <= 0) throw ConfigError("synthetic: frames must be positive");
  if (cfg.objects <= 0) throw ConfigError("synthetic: objects must be positive");
  if (cfg.width <= 0 || cfg.height <= 0) throw ConfigError("synthetic: bad image size");
  if (cfg.speed_min < 0 || cfg.speed_max < cfg.speed_min)
    throw ConfigError("synthetic: bad speed range");
  if (cfg.size_min <= 0 || cfg.size_max < cfg.size_min)
    throw ConfigError("synthetic: bad size range");

  Rng rng(seed);
  Sequence seq;
  seq.name = name;
  seq.width = cfg.width;
  seq.height = cfg.height;
  seq.frame_count = cfg.frames;
  seq.detections.assign(static_cast<std::size_t>(cfg.frames), {});

  std::vector<Object> objects;
  std::map<int, Track> tracks;
  int next_id = 0;
  for (int i = 0; i < cfg.objects; ++i) objects.push_back(spawn_object(next_id++, cfg, rng));

  for (int frame = 0; frame < cfg.frames; ++frame) {
    if (frame > 0) {
      for (Object& o : objects) {
        if (o.alive) step_object(o, cfg, rng);
      }
      int active = 0;
      for (const Object& o : objects) active += o.alive ? 1 : 0;
      for (int missing = cfg.objects - active; missing > 0; --missing) {
        if (rng.bernoulli(cfg.spawn_prob)) objects.push_back(spawn_object(next_id++, cfg, rng));
      }
    }

    std::vector<Detection> gt_boxes;
    for (const Object& o : objects) {
      if (!o.alive) continue;
      const Detection d = to_box(o, frame);
      gt_boxes.push_back(d);
      Track& t = tracks[o.id];
      t.id = o.id;
      t.boxes.push_back(d);
    }

    // Occlusion: of two strongly overlapping boxes, the one with the higher
    // bottom edge (smaller y + h/2, i.e. farther from the camera) vanishes.
    std::vector<bool> occluded(gt_boxes.size(), false);
    for (std::size_t i = 0; i < gt_boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < gt_boxes.size(); ++j) {
        if (iou(gt_boxes[i], gt_boxes[j]) <= cfg.occlusion_iou) continue;
        const double bi = gt_boxes[i].y + 0.5 * gt_boxes[i].h;
        const double bj = gt_boxes[j].y + 0.5 * gt_boxes[j].h;
        occluded[bi < bj ? i : j] = true;
      }
    }

    std::vector<Detection>& dets = seq.detections[static_cast<std::size_t>(frame)];
    for (std::size_t i = 0; i < gt_boxes.size(); ++i) {
      if (occluded[i]) continue;
      if (rng.bernoulli(cfg.fn_rate)) continue;
      Detection d = gt_boxes[i];
      d.x += rng.normal(0.0, cfg.jitter_sigma);
      d.y += rng.normal(0.0, cfg.jitter_sigma);
      d.w = std::max(1e-3, d.w * (1.0 + rng.normal(0.0, cfg.jitter_sigma)));
      d.h = std::max(1e-3, d.h * (1.0 + rng.normal(0.0, cfg.jitter_sigma)));
      d.confidence = rng.uniform(0.8, 1.0);
      d.id = -1;
      dets.push_back(d);
    }
    const std::size_t n_real = dets.size();
    for (std::size_t i = 0; i < n_real; ++i) {
      if (!rng.bernoulli(cfg.fp_rate)) continue;
      Detection d;
      d.frame = frame;
      d.x = rng.uniform();
      d.y = rng.uniform();
      d.w = rng.uniform(cfg.size_min, cfg.size_max);
      d.h = rng.uniform(cfg.size_min, cfg.size_max);
      d.confidence = rng.uniform(0.3, 0.9);
      d.id = -1;
      dets.push_back(d);
    }
  }

  for (auto& [id, t] : tracks) seq.gt.push_back(std::move(t));
  return seq;
}

}  // namespace motrack
