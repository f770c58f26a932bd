#include "motrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "motrack/assignment.hpp"
#include "motrack/errors.hpp"

namespace motrack {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// box-by-frame lookup per track: frame -> box
std::vector<std::map<int, Detection>> index_tracks(const std::vector<Track>& tracks,
                                                   int frame_count, const char* what) {
  std::vector<std::map<int, Detection>> out(tracks.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (const Detection& d : tracks[t].boxes) {
      if (d.frame < 0 || d.frame >= frame_count)
        throw DataError(std::string(what) + " box in frame " + std::to_string(d.frame) +
                        " outside sequence of length " + std::to_string(frame_count));
      if (!out[t].emplace(d.frame, d).second)
        throw DataError(std::string(what) + " track " + std::to_string(tracks[t].id) +
                        " has two boxes in frame " + std::to_string(d.frame));
    }
  }
  return out;
}

void finish_rates(MotMetrics& m) {
  m.mota = m.gt_total > 0
               ? 1.0 - static_cast<double>(m.fp + m.fn + m.ids) / static_cast<double>(m.gt_total)
               : kNan;
  m.motp = m.matches > 0 ? m.iou_sum / static_cast<double>(m.matches) : kNan;
  const long long denom = 2LL * m.idtp + m.idfp + m.idfn;
  m.idf1 = denom > 0 ? 2.0 * static_cast<double>(m.idtp) / static_cast<double>(denom) : kNan;
}

std::string cell(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

MotMetrics evaluate_tracking(const std::vector<Track>& gt, const std::vector<Track>& hyp,
                             int frame_count, double iou_threshold) {
  if (frame_count <= 0) throw ConfigError("evaluate_tracking: frame_count must be positive");
  if (iou_threshold <= 0 || iou_threshold > 1)
    throw ConfigError("evaluate_tracking: iou_threshold must be in (0, 1]");

  const std::vector<std::map<int, Detection>> gt_by_frame =
      index_tracks(gt, frame_count, "ground-truth");
  const std::vector<std::map<int, Detection>> hyp_by_frame =
      index_tracks(hyp, frame_count, "hypothesis");

  MotMetrics m;
  m.gt_tracks = static_cast<int>(gt.size());
  m.hyp_tracks = static_cast<int>(hyp.size());
  for (const auto& t : gt_by_frame) m.gt_total += static_cast<int>(t.size());
  for (const auto& t : hyp_by_frame) m.hyp_total += static_cast<int>(t.size());

  std::vector<int> last_match(gt.size(), -1);   // last hypothesis ever matched
  std::map<int, int> prev_matches;              // gt index -> hyp index, previous frame
  std::vector<int> covered(gt.size(), 0);       // matched frames per gt track
  std::vector<int> present(gt.size(), 0);       // existing frames per gt track
  std::vector<int> runs(gt.size(), 0);          // maximal matched runs per gt track
  std::vector<char> in_run(gt.size(), 0);

  for (int f = 0; f < frame_count; ++f) {
    std::vector<int> gts, hyps;
    for (std::size_t t = 0; t < gt.size(); ++t) {
      if (gt_by_frame[t].count(f)) gts.push_back(static_cast<int>(t));
    }
    for (std::size_t t = 0; t < hyp.size(); ++t) {
      if (hyp_by_frame[t].count(f)) hyps.push_back(static_cast<int>(t));
    }
    for (int g : gts) present[static_cast<std::size_t>(g)]++;

    std::map<int, int> cur;
    std::vector<char> hyp_used(hyp.size(), 0);
    // Keep surviving matches from the previous frame first.
    for (const auto& [g, h] : prev_matches) {
      auto git = gt_by_frame[static_cast<std::size_t>(g)].find(f);
      auto hit = hyp_by_frame[static_cast<std::size_t>(h)].find(f);
      if (git == gt_by_frame[static_cast<std::size_t>(g)].end() ||
          hit == hyp_by_frame[static_cast<std::size_t>(h)].end())
        continue;
      const double o = iou(git->second, hit->second);
      if (o < iou_threshold) continue;
      cur[g] = h;
      hyp_used[static_cast<std::size_t>(h)] = 1;
      m.matches++;
      m.iou_sum += o;
    }

    std::vector<int> free_gt, free_hyp;
    for (int g : gts) {
      if (!cur.count(g)) free_gt.push_back(g);
    }
    for (int h : hyps) {
      if (!hyp_used[static_cast<std::size_t>(h)]) free_hyp.push_back(h);
    }
    if (!free_gt.empty() && !free_hyp.empty()) {
      TensorT<double> cost({static_cast<int>(free_gt.size()), static_cast<int>(free_hyp.size())});
      for (std::size_t r = 0; r < free_gt.size(); ++r) {
        const Detection& gb = gt_by_frame[static_cast<std::size_t>(free_gt[r])].at(f);
        for (std::size_t c = 0; c < free_hyp.size(); ++c) {
          const Detection& hb = hyp_by_frame[static_cast<std::size_t>(free_hyp[c])].at(f);
          const double o = iou(gb, hb);
          cost(static_cast<int>(r), static_cast<int>(c)) =
              o < iou_threshold ? kForbiddenCost : 1.0 - o;
        }
      }
      const std::vector<int> assign = solve_assignment(cost);
      for (std::size_t r = 0; r < free_gt.size(); ++r) {
        if (assign[r] < 0) continue;
        const int g = free_gt[r];
        const int h = free_hyp[static_cast<std::size_t>(assign[r])];
        cur[g] = h;
        hyp_used[static_cast<std::size_t>(h)] = 1;
        m.matches++;
        m.iou_sum += iou(gt_by_frame[static_cast<std::size_t>(g)].at(f),
                         hyp_by_frame[static_cast<std::size_t>(h)].at(f));
      }
    }

    for (const auto& [g, h] : cur) {
      if (last_match[static_cast<std::size_t>(g)] >= 0 &&
          last_match[static_cast<std::size_t>(g)] != h)
        m.ids++;
      last_match[static_cast<std::size_t>(g)] = h;
      covered[static_cast<std::size_t>(g)]++;
    }
    for (int g : gts) {
      const bool matched = cur.count(g) != 0;
      if (matched && !in_run[static_cast<std::size_t>(g)]) runs[static_cast<std::size_t>(g)]++;
      in_run[static_cast<std::size_t>(g)] = matched ? 1 : 0;
    }

    m.fn += static_cast<int>(gts.size() - cur.size());
    int used = 0;
    for (char u : hyp_used) used += u;
    m.fp += static_cast<int>(hyps.size()) - used;
    prev_matches = std::move(cur);
  }

  for (std::size_t g = 0; g < gt.size(); ++g) {
    m.frag += std::max(0, runs[g] - 1);
    if (present[g] == 0) continue;
    const double coverage = static_cast<double>(covered[g]) / static_cast<double>(present[g]);
    if (coverage >= 0.8) {
      m.mostly_tracked++;
    } else if (coverage <= 0.2) {
      m.mostly_lost++;
    } else {
      m.partially_tracked++;
    }
  }

  // Identity-level scores: one global track-to-track matching that maximizes
  // the number of frames where the paired boxes overlap.
  if (!gt.empty() && !hyp.empty()) {
    TensorT<double> overlap({static_cast<int>(gt.size()), static_cast<int>(hyp.size())});
    for (std::size_t g = 0; g < gt.size(); ++g) {
      for (std::size_t h = 0; h < hyp.size(); ++h) {
        int count = 0;
        const auto& gm = gt_by_frame[g];
        const auto& hm = hyp_by_frame[h];
        const auto& small = gm.size() <= hm.size() ? gm : hm;
        const auto& large = gm.size() <= hm.size() ? hm : gm;
        for (const auto& [frame, box] : small) {
          auto it = large.find(frame);
          if (it != large.end() && iou(box, it->second) >= iou_threshold) ++count;
        }
        overlap(static_cast<int>(g), static_cast<int>(h)) = -static_cast<double>(count);
      }
    }
    const std::vector<int> assign = solve_assignment(overlap);
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (assign[g] >= 0) m.idtp += -static_cast<int>(overlap(static_cast<int>(g), assign[g]));
    }
  }
  m.idfp = m.hyp_total - m.idtp;
  m.idfn = m.gt_total - m.idtp;

  finish_rates(m);
  return m;
}

MotMetrics aggregate_metrics(const std::vector<MotMetrics>& per_sequence) {
  MotMetrics m;
  for (const MotMetrics& s : per_sequence) {
    m.gt_total += s.gt_total;
    m.hyp_total += s.hyp_total;
    m.gt_tracks += s.gt_tracks;
    m.hyp_tracks += s.hyp_tracks;
    m.matches += s.matches;
    m.fp += s.fp;
    m.fn += s.fn;
    m.ids += s.ids;
    m.frag += s.frag;
    m.mostly_tracked += s.mostly_tracked;
    m.partially_tracked += s.partially_tracked;
    m.mostly_lost += s.mostly_lost;
    m.idtp += s.idtp;
    m.idfp += s.idfp;
    m.idfn += s.idfn;
    m.iou_sum += s.iou_sum;
  }
  finish_rates(m);
  return m;
}

std::string metrics_table(const std::vector<std::pair<std::string, MotMetrics>>& rows) {
  std::size_t name_w = 8;
  for (const auto& [name, m] : rows) name_w = std::max(name_w, name.size());
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-*s %8s %8s %8s %6s %6s %6s %6s %4s %4s %4s %6s %6s\n",
                static_cast<int>(name_w), "sequence", "MOTA", "MOTP", "IDF1", "IDS", "FRAG", "FP",
                "FN", "MT", "PT", "ML", "GT", "HYP");
  out << line;
  for (const auto& [name, m] : rows) {
    std::snprintf(line, sizeof(line), "%-*s %8s %8s %8s %6d %6d %6d %6d %4d %4d %4d %6d %6d\n",
                  static_cast<int>(name_w), name.c_str(), cell(m.mota).c_str(),
                  cell(m.motp).c_str(), cell(m.idf1).c_str(), m.ids, m.frag, m.fp, m.fn,
                  m.mostly_tracked, m.partially_tracked, m.mostly_lost, m.gt_total, m.hyp_total);
    out << line;
  }
  return out.str();
}

std::string metrics_csv(const std::vector<std::pair<std::string, MotMetrics>>& rows) {
  std::ostringstream out;
  out << "sequence,mota,motp,idf1,ids,frag,fp,fn,matches,mt,pt,ml,gt_boxes,hyp_boxes,gt_tracks,"
         "hyp_tracks,idtp,idfp,idfn\n";
  for (const auto& [name, m] : rows) {
    out << name << ',' << cell(m.mota) << ',' << cell(m.motp) << ',' << cell(m.idf1) << ','
        << m.ids << ',' << m.frag << ',' << m.fp << ',' << m.fn << ',' << m.matches << ','
        << m.mostly_tracked << ',' << m.partially_tracked << ',' << m.mostly_lost << ','
        << m.gt_total << ',' << m.hyp_total << ',' << m.gt_tracks << ',' << m.hyp_tracks << ','
        << m.idtp << ',' << m.idfp << ',' << m.idfn << '\n';
  }
  return out.str();
}

}  // namespace motrack
