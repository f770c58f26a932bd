#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "motrack/box_embed.hpp"
#include "motrack/graph.hpp"
#include "motrack/tracklet_embed.hpp"
#include "motrack/types.hpp"

namespace motrack {

enum class TrackerMode { kFull, kBoxOnly, kIou };

TrackerMode parse_tracker_mode(const std::string& name);  // "full" | "box" | "iou"
std::string tracker_mode_name(TrackerMode mode);

struct TrackerConfig {
  TrackerMode mode = TrackerMode::kFull;
  int box_window = 17;              // frames per box association window
  double box_threshold = 0.7;       // max squared embedding distance, box stage
  double tracklet_threshold = 0.7;  // max squared embedding distance, tracklet stage
  double min_confidence = 0.0;
  bool attention_gate = false;  // additionally require predicted attention >= 0.5
  double iou_threshold = 0.5;   // overlap baseline gate
};

/// Embedding models used by the learned modes. Inference always runs in
/// double precision.
struct TrackerModels {
  const BoxEmbedModelT<double>* box = nullptr;
  const TrackletEmbedModelT<double>* tracklet = nullptr;
};

/// Per adjacent frame pair inside one window, minimum-cost matching of node
/// embeddings; pairs with squared distance at or above the threshold (or
/// failing the attention gate) stay unmatched. Returns matched node index
/// pairs (earlier frame first), ordered by frame then row.
std::vector<std::pair<int, int>> adjacent_frame_matches(const BoxGraph& graph,
                                                        const TensorT<double>& embeddings,
                                                        const TensorT<double>& attention,
                                                        const TrackerConfig& cfg);

/// Builds short per-window chains into a global set of frame-disjoint
/// tracklets. Overlapping windows re-see detections already placed; a chain
/// joins the tracklet holding the majority of its already-placed detections
/// (ties pick the older tracklet, none starts a new one), its unplaced
/// detections append in frame order, and a frame conflict spills the rest of
/// the chain into a fresh tracklet. No detection is placed twice.
class TrackletAccumulator {
 public:
  void add_chain(const std::vector<Detection>& chain);
  std::vector<Tracklet> finish() const;  // ids are creation order

 private:
  int new_tracklet();

  struct Entry {
    std::vector<Detection> boxes;
    std::set<int> frames;
  };
  std::vector<Entry> tracklets_;
  std::map<std::pair<int, int>, int> placed_;  // (frame, det_index) -> tracklet
};

/// Union-find over tracklets where a merge is allowed only while the merged
/// group stays frame-disjoint, so every group is always a valid single
/// identity.
class TrackGrouper {
 public:
  explicit TrackGrouper(const std::vector<Tracklet>& tracklets);
  /// Merges the groups of i and j; returns false (and leaves them apart) if
  /// they share an occupied frame. Already-merged pairs return true.
  bool try_merge(int i, int j);
  /// Member indices per group, each sorted; groups ordered by smallest member.
  std::vector<std::vector<int>> groups() const;

 private:
  int find(int v);
  std::vector<int> parent_;
  std::vector<std::set<int>> frames_;  // by root
};

std::vector<Track> track_sequence(const Sequence& seq, const TrackerConfig& cfg,
                                  const TrackerModels& models);

}  // namespace motrack
