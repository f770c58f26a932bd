#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "motrack/box_embed.hpp"
#include "motrack/errors.hpp"
#include "motrack/graph.hpp"
#include "motrack/synthetic.hpp"
#include "motrack/trainer.hpp"
#include "motrack/tracklet_embed.hpp"
#include "test_util.hpp"

using namespace motrack;
using motrack::testutil::TempDir;

namespace {

std::vector<Sequence> tiny_dataset() {
  SyntheticConfig cfg;
  cfg.frames = 40;
  cfg.objects = 4;
  cfg.fn_rate = 0.05;
  cfg.fp_rate = 0.05;
  cfg.jitter_sigma = 0.004;
  return {generate_synthetic(cfg, 11, "train-a"), generate_synthetic(cfg, 12, "train-b")};
}

BoxEmbedConfig tiny_box_cfg() {
  BoxEmbedConfig c;
  c.blocks = 2;
  c.channels = 8;
  c.att_hidden = 4;
  return c;
}

TrackletEmbedConfig tiny_tracklet_cfg() {
  TrackletEmbedConfig c;
  c.recon_blocks = 1;
  c.tgc_layers = 2;
  c.tgc_hidden = 4;
  c.kernel = 3;
  c.att_hidden = 3;
  c.embed_hidden = 8;
  c.embed_dim = 4;
  c.window = 9;
  return c;
}

TrainConfig short_run(int steps) {
  TrainConfig t;
  t.lr = 3e-3;
  t.max_steps = steps;
  t.batch = 2;
  t.box_window = 9;
  t.log_every = 10;
  t.overfit_windows = 3;  // cycle a fixed set so progress is reliable
  return t;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("box training reduces the loss and writes a working checkpoint") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  const std::string out = tmp.file("box.ck");

  const TrainResult r =
      train_box_model(data, tiny_box_cfg(), short_run(80), LossConfig{}, AugmentConfig{}, 5, out);
  CHECK(r.steps == 80);
  CHECK(r.final_loss < r.initial_loss);

  const Checkpoint ck = load_checkpoint(out, CheckpointKind::kBox);
  CHECK(meta_int(ck, "blocks") == 2);
  CHECK(meta_int(ck, "channels") == 8);
  CHECK(meta_int(ck, "att_hidden") == 4);

  // the restored model must run end to end on fresh data
  BoxEmbedModelT<double> model = box_model_from_checkpoint(ck);
  std::vector<Detection> window;
  for (int f = 0; f < 9; ++f)
    for (const Detection& d : data[0].detections[static_cast<size_t>(f)]) window.push_back(d);
  const BoxGraph g = build_box_graph(window);
  REQUIRE(g.size() > 0);
  const BoxInference<double> inf = box_infer(model, g);
  REQUIRE(inf.embeddings.dim(0) == g.size());
  CHECK(inf.embeddings.dim(1) == 8);
  CHECK(inf.embeddings.all_finite());
  for (int i = 0; i < inf.embeddings.dim(0); ++i) {
    double n = 0;
    for (int c = 0; c < inf.embeddings.dim(1); ++c) n += inf.embeddings(i, c) * inf.embeddings(i, c);
    CHECK(n == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("tracklet training reduces the loss and round-trips its config") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  const std::string out = tmp.file("tracklet.ck");

  const TrainResult r = train_tracklet_model(data, tiny_tracklet_cfg(), short_run(60),
                                             LossConfig{}, AugmentConfig{}, 6, out);
  CHECK(r.steps == 60);
  CHECK(r.final_loss < r.initial_loss);

  const Checkpoint ck = load_checkpoint(out, CheckpointKind::kTracklet);
  TrackletEmbedModelT<double> model = tracklet_model_from_checkpoint(ck);
  CHECK(model.cfg.window == 9);
  CHECK(model.cfg.tgc_layers == 2);
  CHECK(model.cfg.embed_dim == 4);

  // embed some real tracklets with the restored model
  std::vector<Tracklet> lets;
  for (const Track& t : data[0].gt) {
    Tracklet l;
    l.id = t.id;
    for (const Detection& d : t.boxes) {
      if (d.frame < 9) l.boxes.push_back(d);
    }
    if (!l.boxes.empty()) lets.push_back(l);
  }
  REQUIRE(!lets.empty());
  const TrackletGraph g = build_tracklet_graph(lets, 0, 9);
  const TrackletInference<double> inf = tracklet_infer(model, g);
  CHECK(inf.embeddings.dim(0) == g.size());
  CHECK(inf.embeddings.dim(1) == 4);
  CHECK(inf.embeddings.all_finite());
}

TEST_CASE("loss curve is logged as csv") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  const std::string out = tmp.file("box.ck");
  TrainConfig tc = short_run(20);
  tc.log_every = 5;
  train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 5, out);

  const std::string csv = testutil::read_file(out + ".loss.csv");
  CHECK(csv.rfind("step,total,lr,triplet,xent,rec\n", 0) == 0);
  CHECK(csv.find("\n1,") != std::string::npos);    // first step is always logged
  CHECK(csv.find("\n20,") != std::string::npos);   // so is the last
  CHECK(csv.find("\n5,") != std::string::npos);    // and the interval
}

TEST_CASE("logging can be disabled") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  const std::string out = tmp.file("box.ck");
  TrainConfig tc = short_run(5);
  tc.log_every = 0;
  train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 5, out);
  CHECK_FALSE(std::filesystem::exists(out + ".loss.csv"));
  CHECK(std::filesystem::exists(out));
}

TEST_CASE("periodic snapshots are written") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  const std::string out = tmp.file("box.ck");
  TrainConfig tc = short_run(25);
  tc.checkpoint_every = 10;
  train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 5, out);
  CHECK(std::filesystem::exists(out + ".step10"));
  CHECK(std::filesystem::exists(out + ".step20"));
  CHECK(std::filesystem::exists(out));
  CHECK_NOTHROW(load_checkpoint(out + ".step10", CheckpointKind::kBox));
}

TEST_CASE("training is deterministic in the seed") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  TrainConfig tc = short_run(15);
  tc.log_every = 0;

  const TrainResult a =
      train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 42, tmp.file("a.ck"));
  const TrainResult b =
      train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 42, tmp.file("b.ck"));
  CHECK(a.initial_loss == b.initial_loss);
  CHECK(a.final_loss == b.final_loss);
  CHECK(testutil::read_file(tmp.file("a.ck")) == testutil::read_file(tmp.file("b.ck")));

  const TrainResult c =
      train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 43, tmp.file("c.ck"));
  CHECK(a.final_loss != c.final_loss);
}

TEST_CASE("double-precision training works") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  TrainConfig tc = short_run(10);
  tc.use_f64 = true;
  const TrainResult r = train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 7,
                                        tmp.file("box64.ck"));
  CHECK(r.steps == 10);
  CHECK(std::isfinite(r.final_loss));
  CHECK_NOTHROW(box_model_from_checkpoint(load_checkpoint(tmp.file("box64.ck"))));
}

TEST_CASE("invalid training setups are rejected") {
  TempDir tmp("motrack-train");
  const std::vector<Sequence> data = tiny_dataset();
  TrainConfig tc = short_run(5);

  TrainConfig bad_steps = tc;
  bad_steps.max_steps = 0;
  CHECK_THROWS_AS(train_box_model(data, tiny_box_cfg(), bad_steps, LossConfig{}, AugmentConfig{},
                                  5, tmp.file("x.ck")),
                  ConfigError);

  TrainConfig bad_batch = tc;
  bad_batch.batch = 0;
  CHECK_THROWS_AS(train_box_model(data, tiny_box_cfg(), bad_batch, LossConfig{}, AugmentConfig{},
                                  5, tmp.file("x.ck")),
                  ConfigError);

  CHECK_THROWS_AS(train_box_model({}, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 5,
                                  tmp.file("x.ck")),
                  ConfigError);

  // model kind mismatch when restoring
  train_box_model(data, tiny_box_cfg(), tc, LossConfig{}, AugmentConfig{}, 5, tmp.file("box.ck"));
  const Checkpoint ck = load_checkpoint(tmp.file("box.ck"));
  CHECK_THROWS_AS(tracklet_model_from_checkpoint(ck), DataError);
}

}  // TEST_SUITE
