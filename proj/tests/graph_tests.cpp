#include <doctest.h>

#include <cmath>

#include "motrack/errors.hpp"
#include "motrack/graph.hpp"
#include "motrack/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace motrack;

namespace {

Detection det(int frame, int id, double x, double y, double w = 0.1, double h = 0.1) {
  Detection d;
  d.frame = frame;
  d.id = id;
  d.x = x;
  d.y = y;
  d.w = w;
  d.h = h;
  d.confidence = 1.0;
  return d;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("box graph connects exactly neighboring frames") {
  std::vector<Detection> dets = {det(0, 1, 0.2, 0.2), det(1, 1, 0.25, 0.2), det(1, 2, 0.7, 0.7),
                                 det(2, 2, 0.7, 0.72), det(4, 3, 0.5, 0.5)};
  BoxGraph g = build_box_graph(dets);
  CHECK(g.size() == 5);
  CHECK(g.features.dim(0) == 5);
  CHECK(g.features.dim(1) == 4);

  auto connected = [&](int i, int j) { return g.adjacency(i, j) == 1.0; };
  CHECK(connected(0, 1));  // frames 0-1
  CHECK(connected(0, 2));
  CHECK(connected(1, 3));  // frames 1-2
  CHECK(!connected(0, 3));  // frames 0-2: not neighbors
  CHECK(!connected(1, 2));  // same frame
  CHECK(!connected(3, 4));  // frames 2-4: gap
  for (int i = 0; i < 5; ++i) CHECK(g.adjacency(i, i) == 0.0);
  // symmetric
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(g.adjacency(i, j) == g.adjacency(j, i));
}

TEST_CASE("box graph keeps features and bookkeeping aligned") {
  std::vector<Detection> dets = {det(3, 7, 0.1, 0.2, 0.3, 0.4), det(2, -2, 0.5, 0.6, 0.07, 0.08)};
  dets[0].det_index = 12;
  dets[1].det_index = 31;
  BoxGraph g = build_box_graph(dets);
  // nodes follow the input order
  CHECK(g.frame_of[0] == 3);
  CHECK(g.id_of[0] == 7);
  CHECK(g.det_index_of[0] == 12);
  CHECK(g.features(0, 0) == doctest::Approx(0.1));
  CHECK(g.features(0, 3) == doctest::Approx(0.4));
  CHECK(g.id_of[1] == -2);
  CHECK(g.det_index_of[1] == 31);
}

TEST_CASE("empty box graph") {
  BoxGraph g = build_box_graph({});
  CHECK(g.size() == 0);
  CHECK(g.features.dim(0) == 0);
}

TEST_CASE("tracklet graph links only time-disjoint tracklets") {
  Tracklet a;
  a.id = 0;
  a.boxes = {det(0, 0, 0.2, 0.2), det(1, 0, 0.2, 0.2), det(2, 0, 0.2, 0.2)};
  Tracklet b;
  b.id = 1;
  b.boxes = {det(5, 1, 0.6, 0.6), det(6, 1, 0.6, 0.6)};
  Tracklet c;
  c.id = 2;
  c.boxes = {det(2, 2, 0.4, 0.4), det(5, 2, 0.4, 0.4)};  // overlaps both

  TrackletGraph g = build_tracklet_graph({a, b, c}, 0, 8);
  CHECK(g.size() == 3);
  CHECK(g.adjacency(0, 1) == 1.0);
  CHECK(g.adjacency(1, 0) == 1.0);
  CHECK(g.adjacency(0, 2) == 0.0);
  CHECK(g.adjacency(1, 2) == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(g.adjacency(i, i) == 0.0);
}

TEST_CASE("tracklet graph fills features on occupied frames and zeros elsewhere") {
  Tracklet a;
  a.id = 4;
  a.boxes = {det(1, 4, 0.3, 0.4, 0.05, 0.06), det(3, 4, 0.5, 0.5)};
  TrackletGraph g = build_tracklet_graph({a}, 0, 5);
  CHECK(g.mask(0, 0, 1) == 1.0);
  CHECK(g.mask(0, 0, 3) == 1.0);
  CHECK(g.mask(0, 0, 0) == 0.0);
  CHECK(g.mask(0, 0, 2) == 0.0);
  CHECK(g.features(0, 0, 1) == doctest::Approx(0.3));
  CHECK(g.features(0, 1, 1) == doctest::Approx(0.4));
  CHECK(g.features(0, 2, 1) == doctest::Approx(0.05));
  CHECK(g.features(0, 3, 1) == doctest::Approx(0.06));
  CHECK(g.features(0, 0, 2) == 0.0);
  CHECK(g.id_of[0] == 4);
}

TEST_CASE("tracklet graph clips to the window") {
  Tracklet a;
  a.id = 0;
  a.boxes = {det(2, 0, 0.2, 0.2), det(9, 0, 0.9, 0.9)};
  TrackletGraph g = build_tracklet_graph({a}, 0, 5);
  CHECK(g.mask(0, 0, 2) == 1.0);
  double occupied = 0;
  for (int f = 0; f < 5; ++f) occupied += g.mask(0, 0, f);
  CHECK(occupied == 1.0);
}

TEST_CASE("tracklet entirely outside the window throws") {
  Tracklet a;
  a.id = 0;
  a.boxes = {det(10, 0, 0.2, 0.2)};
  CHECK_THROWS_AS(build_tracklet_graph({a}, 0, 5), ContractError);
}

TEST_CASE("adjacency judged on clipped occupancy") {
  // the two tracklets overlap in time outside the window only; inside it they
  // are disjoint, so the edge must be present
  Tracklet a;
  a.id = 0;
  a.boxes = {det(0, 0, 0.2, 0.2), det(8, 0, 0.2, 0.2)};
  Tracklet b;
  b.id = 1;
  b.boxes = {det(2, 1, 0.6, 0.6), det(8, 1, 0.6, 0.6)};
  TrackletGraph g = build_tracklet_graph({a, b}, 0, 5);
  CHECK(g.adjacency(0, 1) == 1.0);
}

TEST_CASE("sym_normalize_plain worked example") {
  Tensord a({2, 2}, {2, 1, 1, 3});
  Tensord n = sym_normalize_plain(a);
  CHECK(n(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(n(0, 1) == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(n(1, 0) == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(n(1, 1) == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("sym_normalize_plain maps zero rows to zero rows") {
  Tensord a({2, 2}, {0, 0, 0, 1});
  Tensord n = sym_normalize_plain(a);
  CHECK(n(0, 0) == 0.0);
  CHECK(n(0, 1) == 0.0);
  CHECK(n(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sym_normalize_plain matches oracle on random graphs") {
  Rng rng(3);
  for (int it = 0; it < 50; ++it) {
    const int n = rng.uniform_int(1, 8);
    Tensord a({n, n});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.bernoulli(0.5) ? rng.uniform(0.0, 2.0) : 0.0;
    Tensord got = sym_normalize_plain(a);
    Tensord want = oracle::sym_normalize(a);
    // the oracle floors degrees instead of zeroing rows; they agree whenever a
    // row has any mass, and both return 0 on empty rows
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (a(i, j) == 0.0) {
          CHECK(got(i, j) == 0.0);
        } else {
          CHECK(got(i, j) == doctest::Approx(want(i, j)).epsilon(1e-10));
        }
      }
  }
}

}  // TEST_SUITE
