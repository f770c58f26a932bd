// Micro benchmarks for the hot paths: tape ops, the two networks, the
// assignment solver and the evaluator. Run with --benchmark_filter=... to
// narrow. Numbers are for watching regressions, not absolute claims.

#include <benchmark/benchmark.h>

#include <vector>

#include "motrack/assignment.hpp"
#include "motrack/autodiff.hpp"
#include "motrack/box_embed.hpp"
#include "motrack/graph.hpp"
#include "motrack/metrics.hpp"
#include "motrack/rng.hpp"
#include "motrack/synthetic.hpp"
#include "motrack/tracker.hpp"
#include "motrack/tracklet_embed.hpp"
#include "motrack/types.hpp"

namespace {

using namespace motrack;

Tensord random_tensor(Rng& rng, const std::vector<int>& shape) {
  Tensord t(shape);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

void bm_matmul_forward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const Tensord a = random_tensor(rng, {n, n});
  const Tensord b = random_tensor(rng, {n, n});
  for (auto _ : state) {
    Tape tape;
    Var c = tape.matmul(tape.leaf(a), tape.leaf(b));
    benchmark::DoNotOptimize(tape.value(c));
  }
}
BENCHMARK(bm_matmul_forward)->Arg(32)->Arg(128);

void bm_matmul_backward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  const Tensord a = random_tensor(rng, {n, n});
  const Tensord b = random_tensor(rng, {n, n});
  for (auto _ : state) {
    Tape tape;
    Var la = tape.leaf(a), lb = tape.leaf(b);
    Var loss = tape.sum(tape.matmul(la, lb));
    tape.backward(loss);
    benchmark::DoNotOptimize(la.grad());
  }
}
BENCHMARK(bm_matmul_backward)->Arg(32)->Arg(128);

void bm_conv1d_backward(benchmark::State& state) {
  Rng rng(3);
  const Tensord x = random_tensor(rng, {16, 8, 64});
  const Tensord w = random_tensor(rng, {8, 8, 3});
  const Tensord bias = random_tensor(rng, {8});
  for (auto _ : state) {
    Tape tape;
    Var lx = tape.leaf(x);
    Var loss = tape.sum(tape.conv1d(lx, tape.leaf(w), tape.leaf(bias)));
    tape.backward(loss);
    benchmark::DoNotOptimize(lx.grad());
  }
}
BENCHMARK(bm_conv1d_backward);

const Sequence& bench_sequence() {
  static const Sequence seq = [] {
    SyntheticConfig sc;
    sc.frames = 120;
    sc.objects = 8;
    return generate_synthetic(sc, 99, "bench");
  }();
  return seq;
}

void bm_box_forward(benchmark::State& state) {
  BoxEmbedConfig cfg;
  cfg.blocks = 4;
  cfg.channels = 64;
  cfg.att_hidden = 16;
  const BoxEmbedModelT<double> model = BoxEmbedModelT<double>::init(cfg, 7);
  std::vector<Detection> window;
  const Sequence& seq = bench_sequence();
  for (int f = 0; f < 17; ++f)
    for (const Detection& d : seq.detections[static_cast<size_t>(f)]) window.push_back(d);
  const BoxGraph g = build_box_graph(window);
  for (auto _ : state) benchmark::DoNotOptimize(box_infer(model, g).embeddings);
  state.counters["nodes"] = static_cast<double>(g.size());
}
BENCHMARK(bm_box_forward);

void bm_tracklet_forward(benchmark::State& state) {
  TrackletEmbedConfig cfg;
  cfg.window = 33;
  const TrackletEmbedModelT<double> model = TrackletEmbedModelT<double>::init(cfg, 8);
  const Sequence& seq = bench_sequence();
  std::vector<Tracklet> ts;
  for (const Track& t : seq.gt) {
    Tracklet tk;
    tk.id = t.id;
    for (const Detection& d : t.boxes)
      if (d.frame < cfg.window) tk.boxes.push_back(d);
    if (!tk.boxes.empty()) ts.push_back(std::move(tk));
  }
  const TrackletGraph g = build_tracklet_graph(ts, 0, cfg.window);
  for (auto _ : state) benchmark::DoNotOptimize(tracklet_infer(model, g).embeddings);
  state.counters["nodes"] = static_cast<double>(g.size());
}
BENCHMARK(bm_tracklet_forward);

void bm_solve_assignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(4);
  Tensord cost = random_tensor(rng, {n, n});
  for (int64_t i = 0; i < cost.numel(); ++i) cost[i] = std::abs(cost[i]);
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(cost));
}
BENCHMARK(bm_solve_assignment)->Arg(8)->Arg(32)->Arg(64);

void bm_evaluate_tracking(benchmark::State& state) {
  const Sequence& seq = bench_sequence();
  TrackerConfig cfg;
  cfg.mode = TrackerMode::kIou;
  TrackerModels models;
  const std::vector<Track> hyp = track_sequence(seq, cfg, models);
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate_tracking(seq.gt, hyp, seq.frame_count, 0.5));
}
BENCHMARK(bm_evaluate_tracking);

}  // namespace

BENCHMARK_MAIN();
