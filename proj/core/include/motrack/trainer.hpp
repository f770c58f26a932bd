#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motrack/augment.hpp"
#include "motrack/box_embed.hpp"
#include "motrack/checkpoint.hpp"
#include "motrack/losses.hpp"
#include "motrack/optim.hpp"
#include "motrack/tracklet_embed.hpp"
#include "motrack/types.hpp"

namespace motrack {

struct TrainConfig {
  double lr = 1e-3;          // base learning rate, cosine-annealed to zero
  int max_steps = 20000;
  int batch = 8;             // windows averaged per optimizer step
  int box_window = 17;       // frames per box training window
  int log_every = 100;
  int checkpoint_every = 0;  // extra snapshots every N steps; 0 = final only
  bool use_f64 = false;      // train in double instead of float
  int overfit_windows = 0;   // >0: pre-draw N windows and cycle them
};

struct TrainResult {
  double initial_loss = 0.0;  // first optimizer step, averaged over the batch
  double final_loss = 0.0;    // last optimizer step
  int steps = 0;
};

/// Trains the box embedding network on windows sampled from the sequences and
/// writes the final checkpoint to `out_path`. A CSV loss curve goes next to
/// it when `log_every` > 0. A non-finite loss aborts with NumericError after
/// dumping the offending window next to the checkpoint.
TrainResult train_box_model(const std::vector<Sequence>& data, const BoxEmbedConfig& model_cfg,
                            const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                            const AugmentConfig& aug_cfg, std::uint64_t seed,
                            const std::string& out_path);

TrainResult train_tracklet_model(const std::vector<Sequence>& data,
                                 const TrackletEmbedConfig& model_cfg,
                                 const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                                 const AugmentConfig& aug_cfg, std::uint64_t seed,
                                 const std::string& out_path);

/// Rebuilds a model from a saved checkpoint, widening weights to double for
/// inference.
BoxEmbedModelT<double> box_model_from_checkpoint(const Checkpoint& ck);
TrackletEmbedModelT<double> tracklet_model_from_checkpoint(const Checkpoint& ck);

Checkpoint make_box_checkpoint(const BoxEmbedConfig& cfg, const ParamStoreT<float>& params);
Checkpoint make_tracklet_checkpoint(const TrackletEmbedConfig& cfg,
                                    const ParamStoreT<float>& params);

}  // namespace motrack
