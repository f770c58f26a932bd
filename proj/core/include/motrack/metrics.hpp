#pragma once

#include <string>
#include <utility>
#include <vector>

#include "motrack/types.hpp"

namespace motrack {

/// Multi-object tracking scores for one sequence (or a sum over sequences).
/// Counts are exact integers; derived rates are NaN when undefined (no ground
/// truth, or no matches for motp).
struct MotMetrics {
  int gt_total = 0;   // ground-truth boxes
  int hyp_total = 0;  // hypothesis boxes
  int gt_tracks = 0;
  int hyp_tracks = 0;
  int matches = 0;
  int fp = 0;
  int fn = 0;
  int ids = 0;   // identity switches against the last known match
  int frag = 0;  // interruptions of per-track coverage
  int mostly_tracked = 0;
  int partially_tracked = 0;
  int mostly_lost = 0;
  int idtp = 0;
  int idfp = 0;
  int idfn = 0;
  double iou_sum = 0.0;  // over matched pairs
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
};

/// Frame-by-frame evaluation: matches from the previous frame are kept while
/// both boxes persist and still overlap, remaining boxes are matched by
/// minimum-cost assignment on 1 - IoU (pairs under the threshold only).
/// A ground-truth object switching to a different hypothesis than its last
/// known one counts one identity switch, even across unmatched gaps.
MotMetrics evaluate_tracking(const std::vector<Track>& gt, const std::vector<Track>& hyp,
                             int frame_count, double iou_threshold = 0.5);

/// Sums the counts of several evaluations and recomputes the derived rates,
/// which equals evaluating the concatenation of the sequences.
MotMetrics aggregate_metrics(const std::vector<MotMetrics>& per_sequence);

std::string metrics_table(const std::vector<std::pair<std::string, MotMetrics>>& rows);
std::string metrics_csv(const std::vector<std::pair<std::string, MotMetrics>>& rows);

}  // namespace motrack
