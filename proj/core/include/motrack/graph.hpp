#pragma once

#include <vector>

#include "motrack/tensor.hpp"
#include "motrack/types.hpp"

namespace motrack {

/// Graph over the individual boxes of a frame window. Node order follows the
/// input detection order. Adjacency links boxes whose frames differ by
/// exactly 1; the diagonal is stored as 0 and self-loops are added explicitly
/// where needed.
struct BoxGraph {
  Tensord features;        // N x 4, rows (x, y, w, h)
  Tensord adjacency;       // N x N, 0/1, zero diagonal
  std::vector<int> frame_of;
  std::vector<int> id_of;  // -1 unknown, -2 false positive
  std::vector<int> det_index_of;

  int size() const { return static_cast<int>(frame_of.size()); }
};

/// Graph over tracklets clipped to a fixed-length frame window. Features hold
/// the per-frame box parameters on occupied frames and zeros elsewhere;
/// `mask` marks occupancy. Adjacency links tracklets with no common occupied
/// frame inside the window.
struct TrackletGraph {
  int window_start = 0;
  int window_len = 0;
  Tensord features;   // N x 4 x T
  Tensord mask;       // N x 1 x T, binary
  Tensord adjacency;  // N x N, 0/1, zero diagonal
  std::vector<int> id_of;

  int size() const { return static_cast<int>(id_of.size()); }
};

/// Builds the box graph for one window. Detections must already be limited to
/// the window; an empty list yields an empty graph.
BoxGraph build_box_graph(const std::vector<Detection>& detections);

/// Builds the tracklet graph for the window [window_start, window_start + T).
/// Every tracklet must have at least one box inside the window
/// (ContractError otherwise).
TrackletGraph build_tracklet_graph(const std::vector<Tracklet>& tracklets, int window_start,
                                   int window_len);

/// Plain (non-differentiated) symmetric normalization D^{-1/2} A D^{-1/2}
/// with degrees floored at eps; zero rows map to zero rows.
Tensord sym_normalize_plain(const Tensord& a, double eps = 1e-8);

}  // namespace motrack
