#include "motrack/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "motrack/errors.hpp"

namespace motrack {
namespace {

// (sequence index, window start) pairs covering the data with half-window
// stride.
std::vector<std::pair<int, int>> enumerate_windows(const std::vector<Sequence>& data,
                                                   int window_len) {
  if (window_len <= 0) throw ConfigError("training: window length must be positive");
  std::vector<std::pair<int, int>> out;
  const int step = std::max(1, window_len / 2);
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (int start = 0; start < data[s].frame_count; start += step)
      out.push_back({static_cast<int>(s), start});
  }
  if (out.empty()) throw ConfigError("training: dataset has no frames");
  return out;
}

struct LossParts {
  double total = 0, triplet = 0, xent = 0, rec = 0;
};

struct CsvLogger {
  std::ofstream out;

  void open(const std::string& path) {
    out.open(path, std::ios::trunc);
    if (!out) throw DataError("training: cannot write loss log: " + path);
    out << "step,total,lr,triplet,xent,rec\n";
  }
  void row(int step, double lr, const LossParts& p) {
    if (!out.is_open()) return;
    out << step << ',' << p.total << ',' << lr << ',' << p.triplet << ',' << p.xent << ','
        << p.rec << '\n';
    out.flush();
  }
};

template <class S>
double scalar_value(TapeT<S>& tape, VarT<S> v) {
  return static_cast<double>(tape.value(v)[0]);
}

/// Policy-driven training loop shared by both networks. The policy supplies
/// window drawing and the per-window forward/loss construction.
template <class S, class Policy>
TrainResult run_training(Policy& policy, const std::vector<Sequence>& data,
                         const TrainConfig& tc, std::uint64_t seed, const std::string& out_path) {
  if (tc.max_steps <= 0) throw ConfigError("training: max_steps must be positive");
  if (tc.batch <= 0) throw ConfigError("training: batch must be positive");

  const std::vector<std::pair<int, int>> windows = enumerate_windows(data, policy.window_len());
  Rng rng(seed);

  auto draw_item = [&]() -> typename Policy::Item {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const auto [si, start] = windows[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(windows.size()) - 1))];
      typename Policy::Item item = policy.draw(data[static_cast<std::size_t>(si)], start, rng);
      item.seq_index = si;
      item.window_start = start;
      if (policy.usable(item)) return item;
    }
    throw ConfigError("training: could not sample a non-empty window (is the dataset empty?)");
  };

  std::vector<typename Policy::Item> fixed;
  if (tc.overfit_windows > 0) {
    for (int i = 0; i < tc.overfit_windows; ++i) fixed.push_back(draw_item());
  }
  std::size_t fixed_cursor = 0;
  typename Policy::Item scratch;
  auto next_item = [&]() -> const typename Policy::Item& {
    if (!fixed.empty()) {
      const typename Policy::Item& item = fixed[fixed_cursor % fixed.size()];
      ++fixed_cursor;
      return item;
    }
    scratch = draw_item();
    return scratch;
  };

  CsvLogger log;
  if (tc.log_every > 0) log.open(out_path + ".loss.csv");

  AdamStateT<S> adam = AdamStateT<S>::init(policy.params());
  const AdamConfig adam_cfg;
  std::vector<TensorT<S>> grad_acc;
  for (const auto& t : policy.params().tensors) grad_acc.push_back(TensorT<S>::zeros(t.shape));

  TrainResult result;
  for (int step = 1; step <= tc.max_steps; ++step) {
    const double lr = cosine_lr(step - 1, tc.max_steps, tc.lr);
    for (auto& g : grad_acc) std::fill(g.data.begin(), g.data.end(), S(0));
    LossParts parts;

    for (int b = 0; b < tc.batch; ++b) {
      const typename Policy::Item& item = next_item();
      TapeT<S> tape;
      BoundParamsT<S> bound;
      LossParts one;
      VarT<S> total = policy.loss(tape, item, bound, one);
      if (!std::isfinite(one.total)) {
        const std::string dump_path = out_path + ".diverged.txt";
        std::ofstream dump(dump_path, std::ios::trunc);
        dump << "step " << step << "\nsequence " << item.seq_index << "\nwindow_start "
             << item.window_start << "\n"
             << policy.describe(item);
        throw NumericError("training: non-finite loss at step " + std::to_string(step) +
                           " (window dumped to " + dump_path + ")");
      }
      tape.backward(total);
      for (int p = 0; p < policy.params().size(); ++p) {
        const TensorT<S> g = tape.grad(bound[p]);
        TensorT<S>& acc = grad_acc[static_cast<std::size_t>(p)];
        for (std::int64_t k = 0; k < g.numel(); ++k) acc[k] += g[k];
      }
      parts.total += one.total;
      parts.triplet += one.triplet;
      parts.xent += one.xent;
      parts.rec += one.rec;
    }

    const double inv_batch = 1.0 / static_cast<double>(tc.batch);
    parts.total *= inv_batch;
    parts.triplet *= inv_batch;
    parts.xent *= inv_batch;
    parts.rec *= inv_batch;
    for (auto& g : grad_acc) {
      for (auto& v : g.data) v = static_cast<S>(v * inv_batch);
    }
    adam_step(policy.params(), grad_acc, adam, adam_cfg, lr);

    if (step == 1) result.initial_loss = parts.total;
    result.final_loss = parts.total;
    result.steps = step;
    if (tc.log_every > 0 && (step == 1 || step % tc.log_every == 0 || step == tc.max_steps))
      log.row(step, lr, parts);
    if (tc.checkpoint_every > 0 && step % tc.checkpoint_every == 0 && step != tc.max_steps)
      save_checkpoint(out_path + ".step" + std::to_string(step), policy.checkpoint());
  }

  save_checkpoint(out_path, policy.checkpoint());
  return result;
}

std::string describe_graph(const Tensord& features, const std::vector<int>& ids) {
  std::ostringstream ss;
  ss << "nodes " << features.dim(0) << "\n";
  for (int i = 0; i < features.dim(0); ++i) {
    ss << i << " id=" << ids[static_cast<std::size_t>(i)];
    for (int c = 0; c < features.dim(1); ++c) ss << ' ' << features(i, c);
    ss << '\n';
  }
  return ss.str();
}

template <class S>
struct BoxPolicy {
  BoxEmbedModelT<S> model;
  const TrainConfig* tc;
  const LossConfig* loss_cfg;
  const AugmentConfig* aug;

  struct Item {
    BoxTrainingWindow window;
    int seq_index = 0, window_start = 0;
  };

  int window_len() const { return tc->box_window; }
  ParamStoreT<S>& params() { return model.params; }

  Item draw(const Sequence& seq, int start, Rng& rng) const {
    Item item;
    item.window = augment_box_window(seq, start, tc->box_window, *aug, rng);
    return item;
  }
  bool usable(const Item& item) const { return item.window.graph.size() > 0; }
  std::string describe(const Item& item) const {
    return describe_graph(item.window.graph.features, item.window.graph.id_of);
  }

  VarT<S> loss(TapeT<S>& tape, const Item& item, BoundParamsT<S>& bound, LossParts& parts) {
    const BoxGraph& g = item.window.graph;
    BoxForwardT<S> fw = box_forward(tape, model, g);
    bound = fw.bound;
    VarT<S> trip = triplet_loss(tape, fw.embeddings, g.id_of, static_cast<S>(loss_cfg->margin));
    VarT<S> bce = bce_attention_loss(tape, fw.attention, g.id_of, g.adjacency);
    VarT<S> total = box_total_loss(tape, trip, bce, *loss_cfg);
    parts.triplet = scalar_value(tape, trip);
    parts.xent = scalar_value(tape, bce);
    parts.rec = 0.0;
    parts.total = scalar_value(tape, total);
    return total;
  }

  Checkpoint checkpoint() const {
    return make_box_checkpoint(model.cfg, model.params.template cast<float>());
  }
};

template <class S>
struct TrackletPolicy {
  TrackletEmbedModelT<S> model;
  const TrainConfig* tc;
  const LossConfig* loss_cfg;
  const AugmentConfig* aug;

  struct Item {
    TrackletTrainingWindow window;
    int seq_index = 0, window_start = 0;
  };

  int window_len() const { return model.cfg.window; }
  ParamStoreT<S>& params() { return model.params; }

  Item draw(const Sequence& seq, int start, Rng& rng) const {
    Item item;
    item.window = augment_tracklet_window(seq, start, model.cfg.window, *aug, rng);
    return item;
  }
  bool usable(const Item& item) const { return item.window.graph.size() > 0; }
  std::string describe(const Item& item) const {
    std::ostringstream ss;
    const TrackletGraph& g = item.window.graph;
    ss << "nodes " << g.size() << " window_len " << g.window_len << "\n";
    for (int i = 0; i < g.size(); ++i) {
      ss << i << " id=" << g.id_of[static_cast<std::size_t>(i)] << " frames";
      for (int t = 0; t < g.window_len; ++t) {
        if (g.mask(i, 0, t) > 0) ss << ' ' << g.window_start + t;
      }
      ss << '\n';
    }
    return ss.str();
  }

  VarT<S> loss(TapeT<S>& tape, const Item& item, BoundParamsT<S>& bound, LossParts& parts) {
    const TrackletGraph& g = item.window.graph;
    TrackletForwardT<S> fw = tracklet_forward(tape, model, g);
    bound = fw.bound;
    VarT<S> trip = triplet_loss(tape, fw.embeddings, g.id_of, static_cast<S>(loss_cfg->margin));
    VarT<S> bce = bce_attention_loss(tape, fw.attention, g.id_of, g.adjacency);
    VarT<S> rec = reconstruction_loss(tape, fw.reconstruction, item.window.gt_traj,
                                      item.window.gt_mask);
    VarT<S> total = tracklet_total_loss(tape, trip, bce, rec, *loss_cfg);
    parts.triplet = scalar_value(tape, trip);
    parts.xent = scalar_value(tape, bce);
    parts.rec = scalar_value(tape, rec);
    parts.total = scalar_value(tape, total);
    return total;
  }

  Checkpoint checkpoint() const {
    return make_tracklet_checkpoint(model.cfg, model.params.template cast<float>());
  }
};

}  // namespace

Checkpoint make_box_checkpoint(const BoxEmbedConfig& cfg, const ParamStoreT<float>& params) {
  Checkpoint ck;
  ck.kind = CheckpointKind::kBox;
  ck.meta["blocks"] = std::to_string(cfg.blocks);
  ck.meta["channels"] = std::to_string(cfg.channels);
  ck.meta["att_hidden"] = std::to_string(cfg.att_hidden);
  ck.params = params;
  return ck;
}

Checkpoint make_tracklet_checkpoint(const TrackletEmbedConfig& cfg,
                                    const ParamStoreT<float>& params) {
  Checkpoint ck;
  ck.kind = CheckpointKind::kTracklet;
  ck.meta["recon_blocks"] = std::to_string(cfg.recon_blocks);
  ck.meta["tgc_layers"] = std::to_string(cfg.tgc_layers);
  ck.meta["tgc_hidden"] = std::to_string(cfg.tgc_hidden);
  ck.meta["kernel"] = std::to_string(cfg.kernel);
  ck.meta["att_hidden"] = std::to_string(cfg.att_hidden);
  ck.meta["embed_hidden"] = std::to_string(cfg.embed_hidden);
  ck.meta["embed_dim"] = std::to_string(cfg.embed_dim);
  ck.meta["window"] = std::to_string(cfg.window);
  ck.params = params;
  return ck;
}

BoxEmbedModelT<double> box_model_from_checkpoint(const Checkpoint& ck) {
  if (ck.kind != CheckpointKind::kBox)
    throw DataError("checkpoint: wrong model kind for this use");
  BoxEmbedModelT<double> m;
  m.cfg.blocks = meta_int(ck, "blocks");
  m.cfg.channels = meta_int(ck, "channels");
  m.cfg.att_hidden = meta_int(ck, "att_hidden");
  m.params = ck.params.cast<double>();
  m.wire();
  return m;
}

TrackletEmbedModelT<double> tracklet_model_from_checkpoint(const Checkpoint& ck) {
  if (ck.kind != CheckpointKind::kTracklet)
    throw DataError("checkpoint: wrong model kind for this use");
  TrackletEmbedModelT<double> m;
  m.cfg.recon_blocks = meta_int(ck, "recon_blocks");
  m.cfg.tgc_layers = meta_int(ck, "tgc_layers");
  m.cfg.tgc_hidden = meta_int(ck, "tgc_hidden");
  m.cfg.kernel = meta_int(ck, "kernel");
  m.cfg.att_hidden = meta_int(ck, "att_hidden");
  m.cfg.embed_hidden = meta_int(ck, "embed_hidden");
  m.cfg.embed_dim = meta_int(ck, "embed_dim");
  m.cfg.window = meta_int(ck, "window");
  m.params = ck.params.cast<double>();
  m.wire();
  return m;
}

TrainResult train_box_model(const std::vector<Sequence>& data, const BoxEmbedConfig& model_cfg,
                            const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                            const AugmentConfig& aug_cfg, std::uint64_t seed,
                            const std::string& out_path) {
  Rng root(seed);
  const std::uint64_t init_seed = root.raw();
  const std::uint64_t sample_seed = root.raw();
  if (train_cfg.use_f64) {
    BoxPolicy<double> policy{BoxEmbedModelT<double>::init(model_cfg, init_seed), &train_cfg,
                             &loss_cfg, &aug_cfg};
    return run_training<double>(policy, data, train_cfg, sample_seed, out_path);
  }
  BoxPolicy<float> policy{BoxEmbedModelT<float>::init(model_cfg, init_seed), &train_cfg,
                          &loss_cfg, &aug_cfg};
  return run_training<float>(policy, data, train_cfg, sample_seed, out_path);
}

TrainResult train_tracklet_model(const std::vector<Sequence>& data,
                                 const TrackletEmbedConfig& model_cfg,
                                 const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                                 const AugmentConfig& aug_cfg, std::uint64_t seed,
                                 const std::string& out_path) {
  Rng root(seed);
  const std::uint64_t init_seed = root.raw();
  const std::uint64_t sample_seed = root.raw();
  if (train_cfg.use_f64) {
    TrackletPolicy<double> policy{TrackletEmbedModelT<double>::init(model_cfg, init_seed),
                                  &train_cfg, &loss_cfg, &aug_cfg};
    return run_training<double>(policy, data, train_cfg, sample_seed, out_path);
  }
  TrackletPolicy<float> policy{TrackletEmbedModelT<float>::init(model_cfg, init_seed), &train_cfg,
                               &loss_cfg, &aug_cfg};
  return run_training<float>(policy, data, train_cfg, sample_seed, out_path);
}

}  // namespace motrack
