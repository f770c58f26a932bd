#include "motrack/augment.hpp"

#include <algorithm>
#include <cmath>

#include "motrack/errors.hpp"

namespace motrack {
namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Boxes of one ground-truth track restricted to [start, start+len), frame sorted.
std::vector<Detection> track_slice(const Track& track, int start, int len) {
  std::vector<Detection> out;
  for (const Detection& d : track.boxes) {
    if (d.frame >= start && d.frame < start + len) out.push_back(d);
  }
  std::sort(out.begin(), out.end(),
            [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
  return out;
}

void flip_box(Detection& d) { d.x = 1.0 - d.x; }

void jitter_box(Detection& d, const AugmentConfig& cfg, Rng& rng) {
  d.x = clamp01(d.x + rng.uniform(-cfg.jitter_center, cfg.jitter_center));
  d.y = clamp01(d.y + rng.uniform(-cfg.jitter_center, cfg.jitter_center));
  d.w *= 1.0 + rng.uniform(-cfg.jitter_size, cfg.jitter_size);
  d.h *= 1.0 + rng.uniform(-cfg.jitter_size, cfg.jitter_size);
}

Detection random_fp_box(int frame_lo, int frame_hi, const AugmentConfig& cfg, Rng& rng) {
  Detection d;
  d.frame = rng.uniform_int(frame_lo, frame_hi);
  d.x = rng.uniform();
  d.y = rng.uniform();
  d.w = rng.uniform(cfg.fp_size_min, cfg.fp_size_max);
  d.h = rng.uniform(cfg.fp_size_min, cfg.fp_size_max);
  d.confidence = rng.uniform(0.3, 0.9);
  d.id = -2;
  return d;
}

}  // namespace

BoxTrainingWindow augment_box_window(const Sequence& seq, int window_start, int window_len,
                                     const AugmentConfig& cfg, Rng& rng) {
  if (window_len <= 0) throw ConfigError("augment_box_window: window_len must be positive");
  const int frame_lo = window_start;
  const int frame_hi_excl = std::min(window_start + window_len, seq.frame_count);
  const int frame_hi = std::max(frame_lo, frame_hi_excl - 1);

  // Real boxes in frame-major, track-major order.
  std::vector<Detection> real;
  for (int f = frame_lo; f < frame_hi_excl; ++f) {
    for (const Track& t : seq.gt) {
      for (const Detection& d : t.boxes) {
        if (d.frame != f) continue;
        Detection b = d;
        b.id = t.id;
        real.push_back(b);
      }
    }
  }

  const bool flip = rng.bernoulli(cfg.flip_prob);
  if (flip) {
    for (Detection& d : real) flip_box(d);
  }

  std::vector<Detection> kept;
  for (const Detection& d : real) {
    if (!rng.bernoulli(cfg.fn_rate)) kept.push_back(d);
  }
  for (Detection& d : kept) jitter_box(d, cfg, rng);

  const std::size_t n_original = real.size();
  for (std::size_t i = 0; i < n_original; ++i) {
    if (rng.bernoulli(cfg.fp_rate)) kept.push_back(random_fp_box(frame_lo, frame_hi, cfg, rng));
  }

  BoxTrainingWindow out;
  out.graph = build_box_graph(kept);
  return out;
}

TrackletTrainingWindow augment_tracklet_window(const Sequence& seq, int window_start,
                                               int window_len, const AugmentConfig& cfg,
                                               Rng& rng) {
  if (window_len <= 0) throw ConfigError("augment_tracklet_window: window_len must be positive");
  const int frame_lo = window_start;
  const int frame_hi_excl = std::min(window_start + window_len, seq.frame_count);
  const int frame_hi = std::max(frame_lo, frame_hi_excl - 1);
  const int T = window_len;

  const bool flip = rng.bernoulli(cfg.flip_prob);

  struct Node {
    Tracklet piece;
    std::vector<Detection> target;  // full true trajectory for the parent track
  };
  std::vector<Node> nodes;
  std::size_t n_original_boxes = 0;

  for (const Track& t : seq.gt) {
    std::vector<Detection> slice = track_slice(t, window_start, window_len);
    if (slice.empty()) continue;
    n_original_boxes += slice.size();
    if (flip) {
      for (Detection& d : slice) flip_box(d);
    }
    const std::vector<Detection> target = slice;  // pre-jitter, pre-dropout

    // Random temporal cuts: each removes frames [cut, cut+gap) and starts a
    // new fragment at the right edge.
    struct Cut {
      int start, gap;
    };
    std::vector<Cut> cuts;
    const int first = slice.front().frame;
    const int last = slice.back().frame;
    if (last > first) {
      const int n_cuts = rng.uniform_int(0, cfg.max_cuts);
      for (int c = 0; c < n_cuts; ++c) {
        const int cut = rng.uniform_int(first + 1, last);
        const int gap = rng.uniform_int(1, std::max(1, cfg.max_gap));
        cuts.push_back({cut, gap});
      }
    }
    std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) { return a.start < b.start; });

    auto piece_index = [&](int frame) {
      int idx = 0;
      for (const Cut& c : cuts) {
        if (frame >= c.start && frame < c.start + c.gap) return -1;  // removed
        if (frame >= c.start) ++idx;
      }
      return idx;
    };

    std::vector<std::vector<Detection>> pieces(cuts.size() + 1);
    for (const Detection& d : slice) {
      const int p = piece_index(d.frame);
      if (p < 0) continue;
      if (rng.bernoulli(cfg.fn_rate)) continue;
      Detection b = d;
      jitter_box(b, cfg, rng);
      b.id = t.id;
      pieces[static_cast<std::size_t>(p)].push_back(b);
    }
    for (std::vector<Detection>& p : pieces) {
      if (p.empty()) continue;
      Node node;
      node.piece.id = t.id;
      node.piece.boxes = std::move(p);
      node.target = target;
      nodes.push_back(std::move(node));
    }
  }

  // Injected false tracklets: single random boxes that must reconstruct
  // themselves.
  for (std::size_t i = 0; i < n_original_boxes; ++i) {
    if (!rng.bernoulli(cfg.fp_rate)) continue;
    Detection d = random_fp_box(frame_lo, frame_hi, cfg, rng);
    Node node;
    node.piece.id = -2;
    node.piece.boxes = {d};
    node.target = {d};
    nodes.push_back(std::move(node));
  }

  std::vector<Tracklet> tracklets;
  tracklets.reserve(nodes.size());
  for (const Node& n : nodes) tracklets.push_back(n.piece);

  TrackletTrainingWindow out;
  out.graph = build_tracklet_graph(tracklets, window_start, window_len);

  const int n = static_cast<int>(nodes.size());
  out.gt_traj = n > 0 ? Tensord::zeros({n, 4, T}) : Tensord::zeros({1, 4, T});
  out.gt_mask = n > 0 ? Tensord::zeros({n, 1, T}) : Tensord::zeros({1, 1, T});
  if (n == 0) {
    out.gt_traj = Tensord({0, 4, T});
    out.gt_mask = Tensord({0, 1, T});
  }
  for (int i = 0; i < n; ++i) {
    for (const Detection& d : nodes[static_cast<std::size_t>(i)].target) {
      const int tt = d.frame - window_start;
      if (tt < 0 || tt >= T) continue;
      out.gt_traj(i, 0, tt) = d.x;
      out.gt_traj(i, 1, tt) = d.y;
      out.gt_traj(i, 2, tt) = d.w;
      out.gt_traj(i, 3, tt) = d.h;
      out.gt_mask(i, 0, tt) = 1.0;
    }
  }
  return out;
}

}  // namespace motrack
