#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "motrack/errors.hpp"
#include "motrack/metrics.hpp"
#include "motrack/rng.hpp"
#include "motrack/types.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace motrack;

namespace {

Detection box_at(int frame, double x, double y, double w = 0.1, double h = 0.1) {
  Detection d;
  d.frame = frame;
  d.x = x;
  d.y = y;
  d.w = w;
  d.h = h;
  return d;
}

Track steady_track(int id, int first, int last, double x, double y, double w = 0.1,
                   double h = 0.1) {
  Track t;
  t.id = id;
  for (int f = first; f <= last; ++f) t.boxes.push_back(box_at(f, x, y, w, h));
  return t;
}

// Ground truth made of separated random walks, and a hypothesis derived from
// it by jitter, dropped boxes, track splits and an occasional spurious track.
void random_instance(Rng& rng, std::vector<Track>& gt, std::vector<Track>& hyp,
                     int& frame_count) {
  frame_count = rng.uniform_int(6, 14);
  const int n_tracks = rng.uniform_int(1, 4);
  gt.clear();
  hyp.clear();
  for (int t = 0; t < n_tracks; ++t) {
    Track g;
    g.id = t;
    double cx = rng.uniform(0.2, 0.8), cy = rng.uniform(0.2, 0.8);
    const int first = rng.uniform_int(0, frame_count / 2);
    const int last = rng.uniform_int(first, frame_count - 1);
    for (int f = first; f <= last; ++f) {
      cx += rng.normal(0.0, 0.004);
      cy += rng.normal(0.0, 0.004);
      g.boxes.push_back(box_at(f, cx, cy));
    }
    gt.push_back(g);

    // hypothesis copy: jitter everything, drop some boxes, maybe split in two
    std::vector<Detection> noisy;
    for (const Detection& d : g.boxes) {
      if (rng.uniform() < 0.12) continue;
      Detection c = d;
      c.x += rng.uniform(-0.004, 0.004);
      c.y += rng.uniform(-0.004, 0.004);
      noisy.push_back(c);
    }
    if (!noisy.empty() && rng.uniform() < 0.5 && noisy.size() >= 2) {
      const size_t cut = static_cast<size_t>(rng.uniform_int(1, static_cast<int>(noisy.size()) - 1));
      Track a, b;
      a.id = 100 + 2 * t;
      b.id = 101 + 2 * t;
      a.boxes.assign(noisy.begin(), noisy.begin() + static_cast<long>(cut));
      b.boxes.assign(noisy.begin() + static_cast<long>(cut), noisy.end());
      hyp.push_back(a);
      hyp.push_back(b);
    } else {
      Track a;
      a.id = 100 + 2 * t;
      a.boxes = noisy;
      hyp.push_back(a);
    }
  }
  if (rng.uniform() < 0.4) {
    Track fp;
    fp.id = 999;
    double cx = rng.uniform(0.1, 0.9), cy = rng.uniform(0.1, 0.9);
    const int first = rng.uniform_int(0, frame_count - 1);
    for (int f = first; f < std::min(frame_count, first + 4); ++f) {
      cx += rng.normal(0.0, 0.01);
      fp.boxes.push_back(box_at(f, cx, cy, 0.08, 0.08));
    }
    hyp.push_back(fp);
  }
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect tracking scores perfectly") {
  std::vector<Track> gt = {steady_track(0, 0, 19, 0.2, 0.3), steady_track(1, 3, 15, 0.6, 0.6),
                           steady_track(2, 0, 9, 0.8, 0.2)};
  std::vector<Track> hyp = gt;
  hyp[0].id = 7;  // labels are irrelevant, geometry decides
  const MotMetrics m = evaluate_tracking(gt, hyp, 20);
  CHECK(m.gt_total == 20 + 13 + 10);
  CHECK(m.hyp_total == m.gt_total);
  CHECK(m.matches == m.gt_total);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  CHECK(m.ids == 0);
  CHECK(m.frag == 0);
  CHECK(m.mostly_tracked == 3);
  CHECK(m.partially_tracked == 0);
  CHECK(m.mostly_lost == 0);
  CHECK(m.mota == doctest::Approx(1.0));
  CHECK(m.motp == doctest::Approx(1.0));
  CHECK(m.idf1 == doctest::Approx(1.0));
  CHECK(m.idtp == m.gt_total);
  CHECK(m.gt_tracks == 3);
  CHECK(m.hyp_tracks == 3);
}

TEST_CASE("track split in half gives idf1 one half") {
  std::vector<Track> gt = {steady_track(0, 0, 9, 0.5, 0.5, 0.2, 0.2)};
  std::vector<Track> hyp = {steady_track(10, 0, 4, 0.5, 0.5, 0.2, 0.2),
                            steady_track(11, 5, 9, 0.5, 0.5, 0.2, 0.2)};
  const MotMetrics m = evaluate_tracking(gt, hyp, 10);
  CHECK(m.matches == 10);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  CHECK(m.ids == 1);
  CHECK(m.frag == 0);  // coverage itself never breaks
  CHECK(m.idtp == 5);  // best single pairing covers one half
  CHECK(m.idfp == 5);
  CHECK(m.idfn == 5);
  CHECK(m.idf1 == doctest::Approx(0.5));
  CHECK(m.mota == doctest::Approx(0.9));
  CHECK(m.mostly_tracked == 1);
}

TEST_CASE("two objects swapping hypotheses cost two switches") {
  // two well-separated constant objects; the hypotheses trade places mid-way
  std::vector<Track> gt = {steady_track(0, 0, 9, 0.3, 0.5), steady_track(1, 0, 9, 0.7, 0.5)};
  Track h0, h1;
  h0.id = 10;
  h1.id = 11;
  for (int f = 0; f < 10; ++f) {
    const double a = f < 5 ? 0.3 : 0.7;
    const double b = f < 5 ? 0.7 : 0.3;
    h0.boxes.push_back(box_at(f, a, 0.5));
    h1.boxes.push_back(box_at(f, b, 0.5));
  }
  const MotMetrics m = evaluate_tracking(gt, {h0, h1}, 10);
  CHECK(m.matches == 20);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  CHECK(m.ids == 2);
  CHECK(m.idtp == 10);
  CHECK(m.idf1 == doctest::Approx(0.5));
  CHECK(m.mota == doctest::Approx(0.9));
}

TEST_CASE("a surviving match is kept over a newly better one") {
  // H0 wins frame 0 outright; in frame 1 H1 sits exactly on the object but
  // the carried H0 match still clears the threshold, so it is kept.
  std::vector<Track> gt = {steady_track(0, 0, 1, 0.5, 0.5, 0.2, 0.2)};
  Track h0, h1;
  h0.id = 10;
  h1.id = 11;
  h0.boxes.push_back(box_at(0, 0.5, 0.5, 0.2, 0.2));
  h0.boxes.push_back(box_at(1, 0.55, 0.5, 0.2, 0.2));  // IoU 0.6, still matched
  h1.boxes.push_back(box_at(0, 0.55, 0.5, 0.2, 0.2));
  h1.boxes.push_back(box_at(1, 0.5, 0.5, 0.2, 0.2));  // IoU 1.0, but too late
  const MotMetrics m = evaluate_tracking(gt, {h0, h1}, 2);
  CHECK(m.matches == 2);
  CHECK(m.ids == 0);
  CHECK(m.fp == 2);
  CHECK(m.fn == 0);
  CHECK(m.motp == doctest::Approx((1.0 + 0.6) / 2));
}

TEST_CASE("an identity switch is charged across a gap") {
  // matched by H0, then unmatched for two frames, then matched by H1
  std::vector<Track> gt = {steady_track(0, 0, 6, 0.5, 0.5)};
  Track h0, h1;
  h0.id = 10;
  h1.id = 11;
  for (int f = 0; f <= 2; ++f) h0.boxes.push_back(box_at(f, 0.5, 0.5));
  for (int f = 5; f <= 6; ++f) h1.boxes.push_back(box_at(f, 0.5, 0.5));
  const MotMetrics m = evaluate_tracking(gt, {h0, h1}, 7);
  CHECK(m.matches == 5);
  CHECK(m.fn == 2);
  CHECK(m.ids == 1);
  CHECK(m.frag == 1);
}

TEST_CASE("fragmentation counts coverage interruptions") {
  std::vector<Track> gt = {steady_track(0, 0, 8, 0.5, 0.5)};
  Track h;
  h.id = 10;
  for (int f : {0, 1, 3, 4, 6, 7}) h.boxes.push_back(box_at(f, 0.5, 0.5));
  const MotMetrics m = evaluate_tracking(gt, {h}, 9);
  CHECK(m.matches == 6);
  CHECK(m.fn == 3);
  CHECK(m.frag == 2);
  CHECK(m.ids == 0);
  CHECK(m.mota == doctest::Approx(1.0 - 3.0 / 9.0));
  CHECK(m.partially_tracked == 1);  // 6 of 9 frames covered
}

TEST_CASE("coverage buckets use inclusive boundaries") {
  // 10-frame tracks covered for 8, 5 and 2 frames: MT at exactly 80%,
  // ML at exactly 20%
  std::vector<Track> gt = {steady_track(0, 0, 9, 0.2, 0.2), steady_track(1, 0, 9, 0.5, 0.5),
                           steady_track(2, 0, 9, 0.8, 0.8)};
  std::vector<Track> hyp = {steady_track(10, 0, 7, 0.2, 0.2), steady_track(11, 0, 4, 0.5, 0.5),
                            steady_track(12, 0, 1, 0.8, 0.8)};
  const MotMetrics m = evaluate_tracking(gt, hyp, 10);
  CHECK(m.mostly_tracked == 1);
  CHECK(m.partially_tracked == 1);
  CHECK(m.mostly_lost == 1);
}

TEST_CASE("empty inputs follow the stated conventions") {
  SUBCASE("no ground truth, some hypotheses") {
    std::vector<Track> hyp = {steady_track(0, 0, 4, 0.5, 0.5)};
    const MotMetrics m = evaluate_tracking({}, hyp, 5);
    CHECK(m.fp == 5);
    CHECK(m.fn == 0);
    CHECK(m.matches == 0);
    CHECK(std::isnan(m.mota));
    CHECK(std::isnan(m.motp));
    CHECK(m.idf1 == doctest::Approx(0.0));  // denominator is hyp_total
  }
  SUBCASE("both empty") {
    const MotMetrics m = evaluate_tracking({}, {}, 5);
    CHECK(m.gt_total == 0);
    CHECK(m.hyp_total == 0);
    CHECK(std::isnan(m.mota));
    CHECK(std::isnan(m.motp));
    CHECK(std::isnan(m.idf1));
  }
  SUBCASE("ground truth with no hypotheses") {
    std::vector<Track> gt = {steady_track(0, 0, 4, 0.5, 0.5)};
    const MotMetrics m = evaluate_tracking(gt, {}, 5);
    CHECK(m.fn == 5);
    CHECK(m.mota == doctest::Approx(0.0));
    CHECK(m.idf1 == doctest::Approx(0.0));
    CHECK(m.mostly_lost == 1);
  }
}

TEST_CASE("invalid arguments and data are rejected") {
  std::vector<Track> gt = {steady_track(0, 0, 4, 0.5, 0.5)};
  CHECK_THROWS_AS(evaluate_tracking(gt, {}, 0), ConfigError);
  CHECK_THROWS_AS(evaluate_tracking(gt, {}, -3), ConfigError);
  CHECK_THROWS_AS(evaluate_tracking(gt, {}, 5, 0.0), ConfigError);
  CHECK_THROWS_AS(evaluate_tracking(gt, {}, 5, 1.5), ConfigError);
  CHECK_NOTHROW(evaluate_tracking(gt, {}, 5, 1.0));

  // box outside the sequence
  CHECK_THROWS_AS(evaluate_tracking(gt, {}, 3), DataError);
  std::vector<Track> bad_hyp = {steady_track(1, 2, 7, 0.5, 0.5)};
  CHECK_THROWS_AS(evaluate_tracking(gt, bad_hyp, 5), DataError);

  // duplicate frame within one track
  Track dup = steady_track(0, 0, 2, 0.5, 0.5);
  dup.boxes.push_back(box_at(1, 0.5, 0.5));
  CHECK_THROWS_AS(evaluate_tracking({dup}, {}, 5), DataError);
}

TEST_CASE("evaluation matches the straight-line reference") {
  Rng rng(4242);
  for (int it = 0; it < 60; ++it) {
    std::vector<Track> gt, hyp;
    int frame_count = 0;
    random_instance(rng, gt, hyp, frame_count);
    const MotMetrics m = evaluate_tracking(gt, hyp, frame_count);
    const oracle::ClearMotOracle o = oracle::clear_mot(gt, hyp, frame_count, 0.5);
    CAPTURE(it);
    CHECK(m.gt_total == o.gt_total);
    CHECK(m.hyp_total == o.hyp_total);
    CHECK(m.matches == o.matches);
    CHECK(m.fp == o.fp);
    CHECK(m.fn == o.fn);
    CHECK(m.ids == o.ids);
    CHECK(m.frag == o.frag);
    CHECK(m.idtp == static_cast<int>(o.idtp));
    CHECK(m.iou_sum == doctest::Approx(o.iou_sum).epsilon(1e-10));
    if (m.gt_total > 0) CHECK(m.mota == doctest::Approx(o.mota).epsilon(1e-12));
    if (2 * m.idtp + m.idfp + m.idfn > 0)
      CHECK(m.idf1 == doctest::Approx(o.idf1).epsilon(1e-12));
  }
}

TEST_CASE("aggregation equals evaluating the concatenation") {
  Rng rng(77);
  std::vector<Track> gt1, hyp1, gt2, hyp2;
  int fc1 = 0, fc2 = 0;
  random_instance(rng, gt1, hyp1, fc1);
  random_instance(rng, gt2, hyp2, fc2);

  const MotMetrics a = evaluate_tracking(gt1, hyp1, fc1);
  const MotMetrics b = evaluate_tracking(gt2, hyp2, fc2);
  const MotMetrics agg = aggregate_metrics({a, b});

  // concatenate the two sequences on a shared timeline
  std::vector<Track> gt = gt1, hyp = hyp1;
  for (Track t : gt2) {
    for (Detection& d : t.boxes) d.frame += fc1;
    gt.push_back(t);
  }
  for (Track t : hyp2) {
    for (Detection& d : t.boxes) d.frame += fc1;
    hyp.push_back(t);
  }
  const MotMetrics cat = evaluate_tracking(gt, hyp, fc1 + fc2);

  CHECK(agg.gt_total == cat.gt_total);
  CHECK(agg.hyp_total == cat.hyp_total);
  CHECK(agg.matches == cat.matches);
  CHECK(agg.fp == cat.fp);
  CHECK(agg.fn == cat.fn);
  CHECK(agg.ids == cat.ids);
  CHECK(agg.frag == cat.frag);
  CHECK(agg.idtp == cat.idtp);
  CHECK(agg.idfp == cat.idfp);
  CHECK(agg.idfn == cat.idfn);
  CHECK(agg.mostly_tracked == cat.mostly_tracked);
  CHECK(agg.mota == doctest::Approx(cat.mota).epsilon(1e-12));
  CHECK(agg.motp == doctest::Approx(cat.motp).epsilon(1e-12));
  CHECK(agg.idf1 == doctest::Approx(cat.idf1).epsilon(1e-12));

  // sanity of the recomputed rates
  CHECK(agg.mota ==
        doctest::Approx(1.0 - double(agg.fp + agg.fn + agg.ids) / double(agg.gt_total)));
}

TEST_CASE("reports render known values and dashes") {
  std::vector<Track> gt = {steady_track(0, 0, 9, 0.5, 0.5, 0.2, 0.2)};
  std::vector<Track> hyp = {steady_track(10, 0, 4, 0.5, 0.5, 0.2, 0.2),
                            steady_track(11, 5, 9, 0.5, 0.5, 0.2, 0.2)};
  const MotMetrics split = evaluate_tracking(gt, hyp, 10);
  const MotMetrics empty = evaluate_tracking({}, {}, 10);

  const std::string table = metrics_table({{"seq-a", split}, {"seq-b", empty}});
  CHECK(table.find("sequence") != std::string::npos);
  CHECK(table.find("seq-a") != std::string::npos);
  CHECK(table.find("0.9000") != std::string::npos);  // MOTA of the split case
  CHECK(table.find("0.5000") != std::string::npos);  // its IDF1
  CHECK(table.find("-") != std::string::npos);       // NaN renders as a dash

  const std::string csv = metrics_csv({{"seq-a", split}});
  CHECK(csv.rfind("sequence,mota,motp,idf1,ids,frag,fp,fn,matches,mt,pt,ml,", 0) == 0);
  CHECK(csv.find("seq-a,0.9000,1.0000,0.5000,1,0,0,0,10,") != std::string::npos);
  const std::string csv_nan = metrics_csv({{"e", empty}});
  CHECK(csv_nan.find("e,-,-,-,") != std::string::npos);
}

}  // TEST_SUITE
