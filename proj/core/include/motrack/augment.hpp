#pragma once

#include "motrack/graph.hpp"
#include "motrack/rng.hpp"
#include "motrack/types.hpp"

namespace motrack {

struct AugmentConfig {
  double flip_prob = 0.5;
  double jitter_center = 0.02;  // absolute +- range on x and y
  double jitter_size = 0.05;    // relative +- range on w and h
  double fn_rate = 0.1;         // per-box dropout
  double fp_rate = 0.1;         // expected injected boxes per ground-truth box
  double fp_size_min = 0.02;    // injected box extent range
  double fp_size_max = 0.2;
  int max_cuts = 3;             // tracklet splits per track
  int max_gap = 10;             // frames removed at each split
};

/// Labeled box window for training, derived from ground truth by horizontal
/// flip, per-box jitter, false-negative dropout and false-positive injection
/// (injected boxes carry id -2).
struct BoxTrainingWindow {
  BoxGraph graph;
};

/// Labeled tracklet window for training: ground-truth tracks are split into
/// temporally disjoint fragments with random gaps, then box-level
/// augmentations apply. `gt_traj`/`gt_mask` hold each node's full true
/// trajectory and occupancy over the window (the reconstruction target);
/// fragments of one track share the same target row.
struct TrackletTrainingWindow {
  TrackletGraph graph;
  Tensord gt_traj;  // N x 4 x T
  Tensord gt_mask;  // N x 1 x T
};

BoxTrainingWindow augment_box_window(const Sequence& seq, int window_start, int window_len,
                                     const AugmentConfig& cfg, Rng& rng);

TrackletTrainingWindow augment_tracklet_window(const Sequence& seq, int window_start,
                                               int window_len, const AugmentConfig& cfg, Rng& rng);

}  // namespace motrack
