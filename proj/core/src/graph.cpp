#include "motrack/graph.hpp"

#include <cmath>
#include <cstdlib>

#include "motrack/errors.hpp"

namespace motrack {

BoxGraph build_box_graph(const std::vector<Detection>& detections) {
  const int n = static_cast<int>(detections.size());
  BoxGraph g;
  g.features = Tensord::zeros({n, 4});
  g.adjacency = Tensord::zeros({n, n});
  g.frame_of.resize(static_cast<size_t>(n));
  g.id_of.resize(static_cast<size_t>(n));
  g.det_index_of.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Detection& d = detections[static_cast<size_t>(i)];
    g.features(i, 0) = d.x;
    g.features(i, 1) = d.y;
    g.features(i, 2) = d.w;
    g.features(i, 3) = d.h;
    g.frame_of[static_cast<size_t>(i)] = d.frame;
    g.id_of[static_cast<size_t>(i)] = d.id;
    g.det_index_of[static_cast<size_t>(i)] = d.det_index;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::abs(g.frame_of[static_cast<size_t>(i)] - g.frame_of[static_cast<size_t>(j)]) == 1)
        g.adjacency(i, j) = 1.0;
    }
  return g;
}

TrackletGraph build_tracklet_graph(const std::vector<Tracklet>& tracklets, int window_start,
                                   int window_len) {
  if (window_len <= 0) throw ConfigError("tracklet window length must be positive");
  const int n = static_cast<int>(tracklets.size());
  TrackletGraph g;
  g.window_start = window_start;
  g.window_len = window_len;
  g.features = Tensord::zeros({n, 4, window_len});
  g.mask = Tensord::zeros({n, 1, window_len});
  g.adjacency = Tensord::zeros({n, n});
  g.id_of.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Tracklet& t = tracklets[static_cast<size_t>(i)];
    g.id_of[static_cast<size_t>(i)] = t.id;
    bool any = false;
    for (const Detection& d : t.boxes) {
      const int local = d.frame - window_start;
      if (local < 0 || local >= window_len) continue;
      any = true;
      g.features(i, 0, local) = d.x;
      g.features(i, 1, local) = d.y;
      g.features(i, 2, local) = d.w;
      g.features(i, 3, local) = d.h;
      g.mask(i, 0, local) = 1.0;
    }
    if (!any) throw ContractError("tracklet lies entirely outside the window");
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool shared = false;
      for (int t = 0; t < window_len && !shared; ++t)
        if (g.mask(i, 0, t) > 0 && g.mask(j, 0, t) > 0) shared = true;
      if (!shared) {
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
      }
    }
  return g;
}

Tensord sym_normalize_plain(const Tensord& a, double eps) {
  if (a.ndim() != 2 || a.dim(0) != a.dim(1)) throw ShapeError("sym_normalize: matrix must be square");
  const int n = a.dim(0);
  Tensord inv({n});
  for (int i = 0; i < n; ++i) {
    double d = 0;
    for (int j = 0; j < n; ++j) d += a(i, j);
    inv(i) = 1.0 / std::sqrt(std::max(d, eps));
  }
  Tensord out({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a(i, j) * inv(i) * inv(j);
  return out;
}

}  // namespace motrack
