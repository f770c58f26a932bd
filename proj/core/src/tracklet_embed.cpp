#include "motrack/tracklet_embed.hpp"

#include "motrack/errors.hpp"
#include "motrack/nn.hpp"

namespace motrack {

namespace {

std::vector<int> channel_plan(const TrackletEmbedConfig& cfg) {
  std::vector<int> plan(static_cast<size_t>(cfg.tgc_layers) + 1, cfg.tgc_hidden);
  plan.front() = 4;
  plan.back() = 4;
  return plan;
}

/// Applies one gated temporal conv module: the single-channel occupancy runs
/// through sigmoid convs, the features through relu convs gated by the
/// occupancy, with an identity (or 1x1-projected) residual per layer.
template <class S>
std::pair<VarT<S>, VarT<S>> tgc_module(TapeT<S>& tape, const BoundParamsT<S>& bound,
                                       const std::vector<typename TrackletEmbedModelT<S>::LayerIdx>& layers,
                                       VarT<S> y, VarT<S> m) {
  for (const auto& l : layers) {
    m = tape.sigmoid(tape.conv1d(m, bound[l.wm], bound[l.bm]));
    VarT<S> gated = tape.mul_mask(tape.relu(tape.conv1d(y, bound[l.wy], bound[l.by])), m);
    VarT<S> residual = l.proj >= 0 ? tape.conv1d(y, bound[l.proj]) : y;
    y = tape.add(gated, residual);
  }
  return {y, m};
}

}  // namespace

template <class S>
TrackletEmbedModelT<S> TrackletEmbedModelT<S>::init(const TrackletEmbedConfig& cfg, uint64_t seed) {
  if (cfg.recon_blocks < 1 || cfg.tgc_layers < 1 || cfg.tgc_hidden < 1 || cfg.att_hidden < 1 ||
      cfg.embed_hidden < 1 || cfg.embed_dim < 1 || cfg.window < 1)
    throw ConfigError("tracklet embed: all sizes must be positive");
  if (cfg.kernel < 1 || cfg.kernel % 2 == 0)
    throw ConfigError("tracklet embed: kernel width must be odd");
  TrackletEmbedModelT<S> m;
  m.cfg = cfg;
  Rng rng(seed);
  auto make = [&](const std::string& name, std::vector<int> shape, int fan_in) {
    TensorT<S> t(std::move(shape));
    init_uniform_fan_in(t, fan_in, rng);
    return m.params.add(name, std::move(t));
  };
  auto make_zero = [&](const std::string& name, std::vector<int> shape) {
    return m.params.add(name, TensorT<S>::zeros(std::move(shape)));
  };
  const auto plan = channel_plan(cfg);
  auto make_module = [&](const std::string& prefix) {
    std::vector<LayerIdx> layers;
    for (int j = 0; j < cfg.tgc_layers; ++j) {
      const int cin = plan[static_cast<size_t>(j)];
      const int cout = plan[static_cast<size_t>(j) + 1];
      const std::string p = prefix + "layer" + std::to_string(j) + ".";
      LayerIdx idx;
      idx.wm = make(p + "wm", {1, 1, cfg.kernel}, cfg.kernel);
      idx.bm = make_zero(p + "bm", {1});
      idx.wy = make(p + "wy", {cout, cin, cfg.kernel}, cin * cfg.kernel);
      idx.by = make_zero(p + "by", {cout});
      if (cin != cout) idx.proj = make(p + "proj", {cout, cin, 1}, cin);
      layers.push_back(idx);
    }
    return layers;
  };
  for (int k = 0; k < cfg.recon_blocks; ++k) {
    const std::string p = "block" + std::to_string(k) + ".";
    BlockIdx blk;
    blk.g1 = make_module(p + "g1.");
    blk.att_w1 = make(p + "att_w1", {1, cfg.att_hidden}, 1);
    blk.att_w2 = make(p + "att_w2", {cfg.att_hidden, 1}, cfg.att_hidden);
    blk.g2 = make_module(p + "g2.");
    m.block_idx.push_back(std::move(blk));
  }
  m.embed_w1 = make("embed.w1", {4 * cfg.window, cfg.embed_hidden}, 4 * cfg.window);
  m.embed_w2 = make("embed.w2", {cfg.embed_hidden, cfg.embed_dim}, cfg.embed_hidden);
  return m;
}

template <class S>
void TrackletEmbedModelT<S>::wire() {
  const auto plan = channel_plan(cfg);
  auto wire_module = [&](const std::string& prefix) {
    std::vector<LayerIdx> layers;
    for (int j = 0; j < cfg.tgc_layers; ++j) {
      const std::string p = prefix + "layer" + std::to_string(j) + ".";
      LayerIdx idx;
      idx.wm = params.index_of(p + "wm");
      idx.bm = params.index_of(p + "bm");
      idx.wy = params.index_of(p + "wy");
      idx.by = params.index_of(p + "by");
      idx.proj = params.index_of(p + "proj");
      if (idx.wm < 0 || idx.bm < 0 || idx.wy < 0 || idx.by < 0)
        throw DataError("tracklet embed: missing parameters at " + p);
      const bool needs_proj = plan[static_cast<size_t>(j)] != plan[static_cast<size_t>(j) + 1];
      if (needs_proj && idx.proj < 0)
        throw DataError("tracklet embed: missing residual projection at " + p);
      if (!needs_proj) idx.proj = -1;
      layers.push_back(idx);
    }
    return layers;
  };
  block_idx.clear();
  for (int k = 0; k < cfg.recon_blocks; ++k) {
    const std::string p = "block" + std::to_string(k) + ".";
    BlockIdx blk;
    blk.g1 = wire_module(p + "g1.");
    blk.att_w1 = params.index_of(p + "att_w1");
    blk.att_w2 = params.index_of(p + "att_w2");
    blk.g2 = wire_module(p + "g2.");
    if (blk.att_w1 < 0 || blk.att_w2 < 0)
      throw DataError("tracklet embed: missing attention kernels at " + p);
    block_idx.push_back(std::move(blk));
  }
  embed_w1 = params.index_of("embed.w1");
  embed_w2 = params.index_of("embed.w2");
  if (embed_w1 < 0 || embed_w2 < 0) throw DataError("tracklet embed: missing embedding head");
}

template <class S>
TrackletForwardT<S> tracklet_forward(TapeT<S>& tape, const TrackletEmbedModelT<S>& model,
                                     const TrackletGraph& graph) {
  const int n = graph.size();
  if (n < 1) throw ContractError("tracklet_forward: graph is empty");
  if (graph.window_len != model.cfg.window)
    throw ContractError("tracklet_forward: window length does not match the model");
  const int t_len = model.cfg.window;

  TrackletForwardT<S> out;
  out.bound = bind_params(tape, model.params);

  Tensord aplus_i = graph.adjacency;
  for (int i = 0; i < n; ++i) aplus_i(i, i) = 1.0;
  VarT<S> mask_const = tape.leaf(aplus_i.template cast<S>());

  VarT<S> x = tape.leaf(graph.features.template cast<S>());
  VarT<S> m = tape.leaf(graph.mask.template cast<S>());
  const S dot_scale = S(1) / static_cast<S>(4 * t_len);
  VarT<S> att{-1, nullptr};
  for (const auto& blk : model.block_idx) {
    auto [x_ext, m_ext] = tgc_module(tape, out.bound, blk.g1, x, m);
    (void)m_ext;
    VarT<S> flat_ext = tape.reshape(x_ext, {n, 4 * t_len});
    att = pairwise_attention(tape, flat_ext, out.bound[blk.att_w1], out.bound[blk.att_w2], dot_scale);
    VarT<S> weighted = sym_normalize(tape, tape.mul(mask_const, att));
    VarT<S> sx = tape.reshape(tape.matmul(weighted, tape.reshape(x, {n, 4 * t_len})), {n, 4, t_len});
    VarT<S> sm = tape.reshape(tape.matmul(weighted, tape.reshape(m, {n, t_len})), {n, 1, t_len});
    auto [y, m_next] = tgc_module(tape, out.bound, blk.g2, sx, sm);
    x = tape.add(x, y);
    m = m_next;
  }
  VarT<S> flat = tape.reshape(x, {n, 4 * t_len});
  VarT<S> hidden = tape.relu(tape.matmul(flat, out.bound[model.embed_w1]));
  out.embeddings = l2_normalize_rows(tape, tape.matmul(hidden, out.bound[model.embed_w2]));
  out.reconstruction = x;
  out.mask = m;
  out.attention = att;
  return out;
}

template <class S>
TrackletInference<S> tracklet_infer(const TrackletEmbedModelT<S>& model, const TrackletGraph& graph) {
  TrackletInference<S> out;
  if (graph.size() == 0) {
    out.embeddings = TensorT<S>::zeros({0, model.cfg.embed_dim});
    out.reconstruction = TensorT<S>::zeros({0, 4, model.cfg.window});
    out.mask = TensorT<S>::zeros({0, 1, model.cfg.window});
    out.attention = TensorT<S>::zeros({0, 0});
    return out;
  }
  TapeT<S> tape;
  TrackletForwardT<S> fwd = tracklet_forward(tape, model, graph);
  out.embeddings = fwd.embeddings.value();
  out.reconstruction = fwd.reconstruction.value();
  out.mask = fwd.mask.value();
  out.attention = fwd.attention.value();
  return out;
}

template struct TrackletEmbedModelT<float>;
template struct TrackletEmbedModelT<double>;
template TrackletForwardT<float> tracklet_forward<float>(TapeT<float>&, const TrackletEmbedModelT<float>&, const TrackletGraph&);
template TrackletForwardT<double> tracklet_forward<double>(TapeT<double>&, const TrackletEmbedModelT<double>&, const TrackletGraph&);
template TrackletInference<float> tracklet_infer<float>(const TrackletEmbedModelT<float>&, const TrackletGraph&);
template TrackletInference<double> tracklet_infer<double>(const TrackletEmbedModelT<double>&, const TrackletGraph&);

}  // namespace motrack
