#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace motrack {

/// One detected box. Geometry is normalized to the image: center x/y and
/// width/height all in [0, 1] coordinates. `id` is the annotated identity
/// (-1 unknown, -2 injected false positive); `det_index` is the detection's
/// stable position in its sequence, used to track provenance.
struct Detection {
  int frame = 0;
  double x = 0, y = 0, w = 0, h = 0;
  double confidence = 1.0;
  int id = -1;
  int det_index = -1;
};

/// Intersection-over-union of two boxes in normalized coordinates. The
/// normalization factors cancel, so this equals the pixel-space IoU.
inline double iou(const Detection& a, const Detection& b) {
  const double ax0 = a.x - a.w / 2, ax1 = a.x + a.w / 2;
  const double ay0 = a.y - a.h / 2, ay1 = a.y + a.h / 2;
  const double bx0 = b.x - b.w / 2, bx1 = b.x + b.w / 2;
  const double by0 = b.y - b.h / 2, by1 = b.y + b.h / 2;
  const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
  const double ih = std::min(ay1, by1) - std::max(ay0, by0);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// A run of boxes belonging to one (provisional) object, ordered by frame,
/// at most one box per frame. Gaps are allowed.
struct Tracklet {
  int id = -1;
  std::vector<Detection> boxes;

  int first_frame() const { return boxes.empty() ? 0 : boxes.front().frame; }
  int last_frame() const { return boxes.empty() ? 0 : boxes.back().frame; }

  /// True if any box falls in the frame range [start, stop).
  bool overlaps_window(int start, int stop) const {
    for (const Detection& d : boxes) {
      if (d.frame >= start && d.frame < stop) return true;
    }
    return false;
  }

  bool overlaps_in_time(const Tracklet& other) const {
    size_t i = 0, j = 0;
    while (i < boxes.size() && j < other.boxes.size()) {
      if (boxes[i].frame == other.boxes[j].frame) return true;
      if (boxes[i].frame < other.boxes[j].frame)
        ++i;
      else
        ++j;
    }
    return false;
  }
};

/// A finalized track: globally identified, frame-sorted boxes.
struct Track {
  int id = -1;
  std::vector<Detection> boxes;
};

/// One annotated or detected video sequence. `detections[f]` lists the boxes
/// of frame f; `gt` is the ground-truth track list when identities are known.
struct Sequence {
  std::string name;
  int width = 0, height = 0;
  int frame_count = 0;
  std::vector<std::vector<Detection>> detections;
  std::vector<Track> gt;

  int total_detections() const {
    int n = 0;
    for (const auto& f : detections) n += static_cast<int>(f.size());
    return n;
  }
};

}  // namespace motrack
