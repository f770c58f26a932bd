#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "motrack/checkpoint.hpp"
#include "motrack/config.hpp"
#include "motrack/errors.hpp"
#include "motrack/formats.hpp"
#include "motrack/metrics.hpp"
#include "motrack/synthetic.hpp"
#include "motrack/tracker.hpp"
#include "motrack/trainer.hpp"

namespace fs = std::filesystem;

namespace motrack {
namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string format = "kitti";
};

void add_common(CLI::App* sub, CommonArgs* c, bool with_format = true) {
  sub->add_option("--config", c->config_path, "key=value configuration file");
  sub->add_option("--set", c->overrides, "override one configuration key (key=value, repeatable)");
  sub->add_option("--seed", c->seed, "random seed");
  if (with_format) sub->add_option("--format", c->format, "annotation format: kitti or mot");
}

RunConfig build_config(const CommonArgs& c) {
  RunConfig cfg;
  ConfigRegistry reg(&cfg);
  if (!c.config_path.empty()) reg.load_file(c.config_path);
  reg.apply_overrides(c.overrides);
  return cfg;
}

std::string config_footer() {
  RunConfig defaults;
  ConfigRegistry reg(&defaults);
  return "Configuration keys (set via --config FILE or --set KEY=VALUE):\n" + reg.help();
}

template <class Fn>
void parallel_for(int n, int workers, Fn fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int run_synth(const CommonArgs& common, const std::string& out_dir, std::ostream& out) {
  const RunConfig cfg = build_config(common);
  const BoxFormat fmt = parse_box_format(common.format);
  if (cfg.synth_sequences <= 0) throw ConfigError("synth.sequences must be positive");
  Rng root(common.seed);
  for (int s = 0; s < cfg.synth_sequences; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth%03d", s);
    const Sequence seq = generate_synthetic(cfg.synth, root.raw(), name);
    write_sequence((fs::path(out_dir) / name).string(), seq, fmt);
    int boxes = 0;
    for (const Track& t : seq.gt) boxes += static_cast<int>(t.boxes.size());
    out << name << ": " << seq.gt.size() << " tracks, " << boxes << " gt boxes, "
        << seq.total_detections() << " detections\n";
  }
  return 0;
}

int run_train(const CommonArgs& common, const std::string& model_kind, const std::string& data_dir,
              const std::string& out_path, std::ostream& out) {
  const RunConfig cfg = build_config(common);
  const BoxFormat fmt = parse_box_format(common.format);
  const std::vector<Sequence> data = load_dataset(data_dir, fmt);
  for (const Sequence& seq : data) {
    if (seq.gt.empty())
      throw DataError("sequence '" + seq.name + "' has no ground-truth tracks; training needs gt");
  }
  const fs::path parent = fs::path(out_path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);

  TrainResult result;
  if (model_kind == "box") {
    result = train_box_model(data, cfg.box_model, cfg.train, cfg.loss, cfg.augment, common.seed,
                             out_path);
  } else if (model_kind == "tracklet") {
    result = train_tracklet_model(data, cfg.tracklet_model, cfg.train, cfg.loss, cfg.augment,
                                  common.seed, out_path);
  } else {
    throw ConfigError("unknown model '" + model_kind + "' (expected box or tracklet)");
  }
  out << "trained " << model_kind << " model for " << result.steps << " steps; loss "
      << result.initial_loss << " -> " << result.final_loss << "\n"
      << "checkpoint written to " << out_path << "\n";
  return 0;
}

int run_track(const CommonArgs& common, const std::string& data_dir, const std::string& out_dir,
              const std::string& box_ck, const std::string& tracklet_ck, std::ostream& out) {
  const RunConfig cfg = build_config(common);
  const BoxFormat fmt = parse_box_format(common.format);
  const std::vector<Sequence> data = load_dataset(data_dir, fmt);

  std::optional<BoxEmbedModelT<double>> box_model;
  std::optional<TrackletEmbedModelT<double>> tracklet_model;
  if (cfg.tracker.mode != TrackerMode::kIou) {
    if (box_ck.empty()) throw ConfigError("this tracker mode needs --box-checkpoint");
    box_model = box_model_from_checkpoint(load_checkpoint(box_ck, CheckpointKind::kBox));
  }
  if (cfg.tracker.mode == TrackerMode::kFull) {
    if (tracklet_ck.empty()) throw ConfigError("tracker mode full needs --tracklet-checkpoint");
    tracklet_model =
        tracklet_model_from_checkpoint(load_checkpoint(tracklet_ck, CheckpointKind::kTracklet));
  }
  TrackerModels models;
  if (box_model) models.box = &*box_model;
  if (tracklet_model) models.tracklet = &*tracklet_model;

  std::vector<std::vector<Track>> results(data.size());
  parallel_for(static_cast<int>(data.size()), common.workers, [&](int i) {
    results[static_cast<std::size_t>(i)] =
        track_sequence(data[static_cast<std::size_t>(i)], cfg.tracker, models);
  });

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string path = (fs::path(out_dir) / (data[i].name + ".txt")).string();
    write_tracks_file(path, results[i], data[i], fmt);
    int boxes = 0;
    for (const Track& t : results[i]) boxes += static_cast<int>(t.boxes.size());
    out << data[i].name << ": " << results[i].size() << " tracks, " << boxes << " boxes\n";
  }
  return 0;
}

int run_eval(const CommonArgs& common, const std::string& data_dir, const std::string& tracks_dir,
             const std::string& csv_path, std::ostream& out) {
  const RunConfig cfg = build_config(common);
  const BoxFormat fmt = parse_box_format(common.format);
  const std::vector<Sequence> data = load_dataset(data_dir, fmt);
  for (const Sequence& seq : data) {
    if (seq.gt.empty())
      throw DataError("sequence '" + seq.name + "' has no ground-truth tracks; nothing to score");
  }

  std::vector<MotMetrics> per_seq(data.size());
  parallel_for(static_cast<int>(data.size()), common.workers, [&](int i) {
    const Sequence& seq = data[static_cast<std::size_t>(i)];
    const std::string path = (fs::path(tracks_dir) / (seq.name + ".txt")).string();
    const std::vector<Track> hyp = load_tracks_file(path, seq, fmt);
    per_seq[static_cast<std::size_t>(i)] =
        evaluate_tracking(seq.gt, hyp, seq.frame_count, cfg.eval_iou);
  });

  std::vector<std::pair<std::string, MotMetrics>> rows;
  for (std::size_t i = 0; i < data.size(); ++i) rows.push_back({data[i].name, per_seq[i]});
  rows.push_back({"TOTAL", aggregate_metrics(per_seq)});
  out << metrics_table(rows);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw DataError("cannot write: " + csv_path);
    csv << metrics_csv(rows);
  }
  return 0;
}

int run_inspect(const std::string& ck_path, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(ck_path);
  out << "kind: " << (ck.kind == CheckpointKind::kBox ? "box" : "tracklet") << "\n";
  for (const auto& [key, val] : ck.meta) out << "meta." << key << ": " << val << "\n";
  std::int64_t total = 0;
  for (int i = 0; i < ck.params.size(); ++i) {
    const TensorT<float>& t = ck.params.at(i);
    double lo = 0, hi = 0, sum = 0;
    if (t.numel() > 0) {
      lo = hi = t[0];
      for (std::int64_t k = 0; k < t.numel(); ++k) {
        lo = std::min(lo, static_cast<double>(t[k]));
        hi = std::max(hi, static_cast<double>(t[k]));
        sum += t[k];
      }
    }
    out << ck.params.names[static_cast<std::size_t>(i)] << ": shape (";
    for (int d = 0; d < t.ndim(); ++d) out << (d ? ", " : "") << t.dim(d);
    char stats[128];
    std::snprintf(stats, sizeof(stats), "), %lld values, min %.6g, max %.6g, mean %.6g",
                  static_cast<long long>(t.numel()), lo, hi,
                  t.numel() > 0 ? sum / static_cast<double>(t.numel()) : 0.0);
    out << stats << "\n";
    total += t.numel();
  }
  out << "total parameters: " << total << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motion-only multi-object tracker: synthetic data, training, tracking, scoring"};
  app.require_subcommand(1);
  app.footer(config_footer());

  CommonArgs common;
  std::string out_path, data_dir, tracks_dir, csv_path, model_kind;
  std::string box_ck, tracklet_ck, inspect_path;

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic annotated sequences");
  add_common(synth, &common);
  synth->add_option("--out", out_path, "output dataset directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train an embedding model on a dataset");
  add_common(train, &common);
  train->add_option("model", model_kind, "which model: box or tracklet")->required();
  train->add_option("--data", data_dir, "dataset directory with ground truth")->required();
  train->add_option("--out", out_path, "checkpoint output path")->required();

  CLI::App* track = app.add_subcommand("track", "Run the tracker over detections");
  add_common(track, &common);
  track->add_option("--data", data_dir, "dataset directory with detections")->required();
  track->add_option("--out", out_path, "output directory for track files")->required();
  track->add_option("--box-checkpoint", box_ck, "box model checkpoint");
  track->add_option("--tracklet-checkpoint", tracklet_ck, "tracklet model checkpoint");
  track->add_option("--workers", common.workers, "sequences processed in parallel");

  CLI::App* eval = app.add_subcommand("eval", "Score track files against ground truth");
  add_common(eval, &common);
  eval->add_option("--data", data_dir, "dataset directory with ground truth")->required();
  eval->add_option("--tracks", tracks_dir, "directory of <sequence>.txt track files")->required();
  eval->add_option("--csv", csv_path, "also write scores as CSV");
  eval->add_option("--workers", common.workers, "sequences scored in parallel");

  CLI::App* inspect = app.add_subcommand("inspect", "Describe a checkpoint file");
  inspect->add_option("checkpoint", inspect_path, "checkpoint path")->required();

  std::vector<const char*> argv;
  argv.push_back("motrack");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth)) return run_synth(common, out_path, out);
    if (app.got_subcommand(train)) return run_train(common, model_kind, data_dir, out_path, out);
    if (app.got_subcommand(track))
      return run_track(common, data_dir, out_path, box_ck, tracklet_ck, out);
    if (app.got_subcommand(eval)) return run_eval(common, data_dir, tracks_dir, csv_path, out);
    if (app.got_subcommand(inspect)) return run_inspect(inspect_path, out);
    err << "error: no command given\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace motrack
