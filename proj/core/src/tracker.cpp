#include "motrack/tracker.hpp"

#include <algorithm>
#include <tuple>

#include "motrack/assignment.hpp"
#include "motrack/errors.hpp"

namespace motrack {
namespace {

double sq_dist_rows(const TensorT<double>& emb, int i, int j) {
  double acc = 0.0;
  const int dim = emb.dim(1);
  for (int c = 0; c < dim; ++c) {
    const double d = emb(i, c) - emb(j, c);
    acc += d * d;
  }
  return acc;
}

// Detections kept for tracking, per frame, with det_index set to the position
// in the kept list so every detection has a stable identity.
std::vector<std::vector<Detection>> filter_detections(const Sequence& seq, double min_confidence) {
  std::vector<std::vector<Detection>> out(seq.detections.size());
  for (std::size_t f = 0; f < seq.detections.size(); ++f) {
    for (const Detection& d : seq.detections[f]) {
      if (d.confidence < min_confidence) continue;
      if (d.w <= 0 || d.h <= 0) continue;
      Detection kept = d;
      kept.det_index = static_cast<int>(out[f].size());
      out[f].push_back(kept);
    }
  }
  return out;
}

std::vector<Track> finalize_tracks(std::vector<Track> tracks) {
  for (Track& t : tracks) {
    std::sort(t.boxes.begin(), t.boxes.end(),
              [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < t.boxes.size(); ++i) {
      if (t.boxes[i].frame == t.boxes[i - 1].frame)
        throw ContractError("tracker: produced a track with two boxes in one frame");
    }
  }
  std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
    const int fa = a.boxes.empty() ? 0 : a.boxes.front().frame;
    const int fb = b.boxes.empty() ? 0 : b.boxes.front().frame;
    if (fa != fb) return fa < fb;
    return a.id < b.id;
  });
  for (std::size_t i = 0; i < tracks.size(); ++i) tracks[i].id = static_cast<int>(i);
  return tracks;
}

std::vector<Track> iou_baseline(const std::vector<std::vector<Detection>>& frames,
                                const TrackerConfig& cfg) {
  std::vector<Track> tracks;
  std::vector<int> active;  // indices of tracks whose last box is in the previous frame
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::vector<Detection>& dets = frames[f];
    struct Cand {
      double overlap;
      int track_slot, det;
    };
    std::vector<Cand> cands;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Detection& last = tracks[static_cast<std::size_t>(active[a])].boxes.back();
      for (std::size_t d = 0; d < dets.size(); ++d) {
        const double o = iou(last, dets[d]);
        if (o >= cfg.iou_threshold) cands.push_back({o, static_cast<int>(a), static_cast<int>(d)});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.overlap != b.overlap) return a.overlap > b.overlap;
      if (a.track_slot != b.track_slot) return a.track_slot < b.track_slot;
      return a.det < b.det;
    });
    std::vector<bool> slot_used(active.size(), false), det_used(dets.size(), false);
    std::vector<int> next_active;
    for (const Cand& c : cands) {
      if (slot_used[static_cast<std::size_t>(c.track_slot)] ||
          det_used[static_cast<std::size_t>(c.det)])
        continue;
      slot_used[static_cast<std::size_t>(c.track_slot)] = true;
      det_used[static_cast<std::size_t>(c.det)] = true;
      const int ti = active[static_cast<std::size_t>(c.track_slot)];
      tracks[static_cast<std::size_t>(ti)].boxes.push_back(dets[static_cast<std::size_t>(c.det)]);
      next_active.push_back(ti);
    }
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (det_used[d]) continue;
      const int ti = static_cast<int>(tracks.size());
      Track t;
      t.id = ti;
      t.boxes.push_back(dets[d]);
      tracks.push_back(std::move(t));
      next_active.push_back(ti);
    }
    std::sort(next_active.begin(), next_active.end());
    active = std::move(next_active);
  }
  return finalize_tracks(std::move(tracks));
}

}  // namespace

TrackerMode parse_tracker_mode(const std::string& name) {
  if (name == "full") return TrackerMode::kFull;
  if (name == "box") return TrackerMode::kBoxOnly;
  if (name == "iou") return TrackerMode::kIou;
  throw ConfigError("unknown tracker mode '" + name + "' (expected full, box or iou)");
}

std::string tracker_mode_name(TrackerMode mode) {
  switch (mode) {
    case TrackerMode::kFull: return "full";
    case TrackerMode::kBoxOnly: return "box";
    default: return "iou";
  }
}

std::vector<std::pair<int, int>> adjacent_frame_matches(const BoxGraph& graph,
                                                        const TensorT<double>& embeddings,
                                                        const TensorT<double>& attention,
                                                        const TrackerConfig& cfg) {
  const int n = graph.size();
  if (embeddings.ndim() != 2 || embeddings.dim(0) != n)
    throw ShapeError("adjacent_frame_matches: embeddings must have one row per node");
  std::map<int, std::vector<int>> by_frame;
  for (int i = 0; i < n; ++i) by_frame[graph.frame_of[static_cast<std::size_t>(i)]].push_back(i);

  std::vector<std::pair<int, int>> out;
  for (const auto& [frame, rows] : by_frame) {
    auto it = by_frame.find(frame + 1);
    if (it == by_frame.end()) continue;
    const std::vector<int>& cols = it->second;
    TensorT<double> cost({static_cast<int>(rows.size()), static_cast<int>(cols.size())});
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double d = sq_dist_rows(embeddings, rows[r], cols[c]);
        const bool gated = cfg.attention_gate && attention(rows[r], cols[c]) < 0.5;
        cost(static_cast<int>(r), static_cast<int>(c)) =
            (d >= cfg.box_threshold || gated) ? kForbiddenCost : d;
      }
    }
    const std::vector<int> assign = solve_assignment(cost);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int c = assign[r];
      if (c >= 0) out.emplace_back(rows[r], cols[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

int TrackletAccumulator::new_tracklet() {
  tracklets_.push_back({});
  return static_cast<int>(tracklets_.size()) - 1;
}

void TrackletAccumulator::add_chain(const std::vector<Detection>& chain) {
  if (chain.empty()) return;

  std::map<int, int> votes;
  for (const Detection& d : chain) {
    auto it = placed_.find({d.frame, d.det_index});
    if (it != placed_.end()) ++votes[it->second];
  }
  int target = -1, best = 0;
  for (const auto& [tracklet, count] : votes) {
    if (count > best) {  // ties keep the earlier (lower-index) tracklet
      best = count;
      target = tracklet;
    }
  }
  if (target < 0) target = new_tracklet();

  bool spilled = false;
  for (const Detection& d : chain) {
    const std::pair<int, int> key{d.frame, d.det_index};
    if (placed_.count(key)) continue;
    if (!spilled && tracklets_[static_cast<std::size_t>(target)].frames.count(d.frame)) {
      target = new_tracklet();
      spilled = true;
    }
    Entry& e = tracklets_[static_cast<std::size_t>(target)];
    e.boxes.push_back(d);
    e.frames.insert(d.frame);
    placed_[key] = target;
  }
}

std::vector<Tracklet> TrackletAccumulator::finish() const {
  std::vector<Tracklet> out;
  for (std::size_t i = 0; i < tracklets_.size(); ++i) {
    if (tracklets_[i].boxes.empty()) continue;
    Tracklet t;
    t.id = static_cast<int>(out.size());
    t.boxes = tracklets_[i].boxes;
    std::sort(t.boxes.begin(), t.boxes.end(),
              [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    out.push_back(std::move(t));
  }
  return out;
}

TrackGrouper::TrackGrouper(const std::vector<Tracklet>& tracklets) {
  parent_.resize(tracklets.size());
  frames_.resize(tracklets.size());
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    parent_[i] = static_cast<int>(i);
    for (const Detection& d : tracklets[i].boxes) frames_[i].insert(d.frame);
  }
}

int TrackGrouper::find(int v) {
  while (parent_[static_cast<std::size_t>(v)] != v) {
    parent_[static_cast<std::size_t>(v)] =
        parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(v)])];
    v = parent_[static_cast<std::size_t>(v)];
  }
  return v;
}

bool TrackGrouper::try_merge(int i, int j) {
  int ri = find(i), rj = find(j);
  if (ri == rj) return true;
  std::set<int>& fi = frames_[static_cast<std::size_t>(ri)];
  std::set<int>& fj = frames_[static_cast<std::size_t>(rj)];
  const std::set<int>& small = fi.size() <= fj.size() ? fi : fj;
  const std::set<int>& large = fi.size() <= fj.size() ? fj : fi;
  for (int f : small) {
    if (large.count(f)) return false;
  }
  if (fi.size() < fj.size()) std::swap(ri, rj);
  // rj joins ri
  frames_[static_cast<std::size_t>(ri)].insert(frames_[static_cast<std::size_t>(rj)].begin(),
                                               frames_[static_cast<std::size_t>(rj)].end());
  frames_[static_cast<std::size_t>(rj)].clear();
  parent_[static_cast<std::size_t>(rj)] = ri;
  return true;
}

std::vector<std::vector<int>> TrackGrouper::groups() const {
  TrackGrouper* self = const_cast<TrackGrouper*>(this);
  std::map<int, std::vector<int>> by_root;
  for (std::size_t i = 0; i < parent_.size(); ++i)
    by_root[self->find(static_cast<int>(i))].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> out;
  std::map<int, std::vector<int>> ordered;
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    ordered[members.front()] = members;
  }
  for (auto& [first, members] : ordered) out.push_back(std::move(members));
  return out;
}

std::vector<Track> track_sequence(const Sequence& seq, const TrackerConfig& cfg,
                                  const TrackerModels& models) {
  if (cfg.box_window < 2 && cfg.mode != TrackerMode::kIou)
    throw ConfigError("tracker: box_window must be at least 2");
  const std::vector<std::vector<Detection>> frames = filter_detections(seq, cfg.min_confidence);

  if (cfg.mode == TrackerMode::kIou) return iou_baseline(frames, cfg);
  if (models.box == nullptr) throw ConfigError("tracker: this mode needs a box embedding model");

  // Stage 1: short-range association in half-overlapping windows.
  TrackletAccumulator acc;
  const int step = std::max(1, cfg.box_window / 2);
  for (int start = 0; start < seq.frame_count; start += step) {
    std::vector<Detection> window;
    const int stop = std::min(seq.frame_count, start + cfg.box_window);
    for (int f = start; f < stop; ++f)
      window.insert(window.end(), frames[static_cast<std::size_t>(f)].begin(),
                    frames[static_cast<std::size_t>(f)].end());
    if (window.empty()) continue;

    const BoxGraph graph = build_box_graph(window);
    const BoxInference<double> fw = box_infer(*models.box, graph);
    const std::vector<std::pair<int, int>> matches =
        adjacent_frame_matches(graph, fw.embeddings, fw.attention, cfg);

    std::vector<int> next(window.size(), -1), prev(window.size(), -1);
    for (const auto& [a, b] : matches) {
      next[static_cast<std::size_t>(a)] = b;
      prev[static_cast<std::size_t>(b)] = a;
    }
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (prev[i] >= 0) continue;
      std::vector<Detection> chain;
      for (int v = static_cast<int>(i); v >= 0; v = next[static_cast<std::size_t>(v)])
        chain.push_back(window[static_cast<std::size_t>(v)]);
      acc.add_chain(chain);
    }
  }
  const std::vector<Tracklet> tracklets = acc.finish();

  if (cfg.mode == TrackerMode::kBoxOnly) {
    std::vector<Track> tracks;
    for (const Tracklet& t : tracklets) tracks.push_back({t.id, t.boxes});
    return finalize_tracks(std::move(tracks));
  }

  if (models.tracklet == nullptr)
    throw ConfigError("tracker: full mode needs a tracklet embedding model");

  // Stage 2: long-range regrouping of tracklets in wide windows.
  TrackGrouper grouper(tracklets);
  const int T = models.tracklet->cfg.window;
  const int step2 = std::max(1, T / 2);
  for (int start = 0; start < seq.frame_count; start += step2) {
    std::vector<int> present;
    std::vector<Tracklet> subset;
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
      if (tracklets[i].overlaps_window(start, start + T)) {
        present.push_back(static_cast<int>(i));
        subset.push_back(tracklets[i]);
      }
    }
    if (present.size() < 2) continue;

    const TrackletGraph graph = build_tracklet_graph(subset, start, T);
    const TrackletInference<double> fw = tracklet_infer(*models.tracklet, graph);

    struct Pair {
      double dist;
      int i, j;  // window-local
    };
    std::vector<Pair> pairs;
    const int n = graph.size();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (graph.adjacency(i, j) == 0.0) continue;  // share a frame in this window
        if (cfg.attention_gate && fw.attention(i, j) < 0.5) continue;
        const double d = sq_dist_rows(fw.embeddings, i, j);
        if (d < cfg.tracklet_threshold) pairs.push_back({d, i, j});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      if (a.i != b.i) return a.i < b.i;
      return a.j < b.j;
    });
    for (const Pair& p : pairs)
      grouper.try_merge(present[static_cast<std::size_t>(p.i)],
                        present[static_cast<std::size_t>(p.j)]);
  }

  std::vector<Track> tracks;
  for (const std::vector<int>& group : grouper.groups()) {
    Track t;
    t.id = group.front();
    for (int idx : group) {
      const std::vector<Detection>& boxes = tracklets[static_cast<std::size_t>(idx)].boxes;
      t.boxes.insert(t.boxes.end(), boxes.begin(), boxes.end());
    }
    if (!t.boxes.empty()) tracks.push_back(std::move(t));
  }
  return finalize_tracks(std::move(tracks));
}

}  // namespace motrack
