#include "motrack/box_embed.hpp"

#include "motrack/errors.hpp"
#include "motrack/nn.hpp"

namespace motrack {

template <class S>
BoxEmbedModelT<S> BoxEmbedModelT<S>::init(const BoxEmbedConfig& cfg, uint64_t seed) {
  if (cfg.blocks < 1 || cfg.channels < 1 || cfg.att_hidden < 1)
    throw ConfigError("box embed: blocks, channels and att_hidden must be positive");
  BoxEmbedModelT<S> m;
  m.cfg = cfg;
  Rng rng(seed);
  auto make = [&](const std::string& name, std::vector<int> shape, int fan_in) {
    TensorT<S> t(std::move(shape));
    init_uniform_fan_in(t, fan_in, rng);
    return m.params.add(name, std::move(t));
  };
  m.proj = make("proj", {4, cfg.channels}, 4);
  for (int l = 0; l < cfg.blocks; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    BlockIdx idx;
    idx.w = make(p + "w", {cfg.channels, cfg.channels}, cfg.channels);
    idx.att_w1 = make(p + "att_w1", {1, cfg.att_hidden}, 1);
    idx.att_w2 = make(p + "att_w2", {cfg.att_hidden, 1}, cfg.att_hidden);
    m.block_idx.push_back(idx);
  }
  return m;
}

template <class S>
void BoxEmbedModelT<S>::wire() {
  proj = params.index_of("proj");
  if (proj < 0) throw DataError("box embed: missing proj parameter");
  block_idx.clear();
  for (int l = 0; l < cfg.blocks; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    BlockIdx idx;
    idx.w = params.index_of(p + "w");
    idx.att_w1 = params.index_of(p + "att_w1");
    idx.att_w2 = params.index_of(p + "att_w2");
    if (idx.w < 0 || idx.att_w1 < 0 || idx.att_w2 < 0)
      throw DataError("box embed: missing parameters for block " + std::to_string(l));
    block_idx.push_back(idx);
  }
}

template <class S>
BoxForwardT<S> box_forward(TapeT<S>& tape, const BoxEmbedModelT<S>& model, const BoxGraph& graph) {
  const int n = graph.size();
  if (n < 1) throw ContractError("box_forward: graph is empty");
  BoxForwardT<S> out;
  out.bound = bind_params(tape, model.params);

  Tensord aplus_i = graph.adjacency;
  for (int i = 0; i < n; ++i) aplus_i(i, i) = 1.0;
  VarT<S> mask = tape.leaf(aplus_i.template cast<S>());

  VarT<S> x0 = tape.leaf(graph.features.template cast<S>());
  VarT<S> x = tape.matmul(x0, out.bound[model.proj]);
  const S dot_scale = S(1) / static_cast<S>(model.cfg.channels);
  VarT<S> att{-1, nullptr};
  for (const auto& blk : model.block_idx) {
    att = pairwise_attention(tape, x, out.bound[blk.att_w1], out.bound[blk.att_w2], dot_scale);
    VarT<S> weighted = sym_normalize(tape, tape.mul(mask, att));
    VarT<S> h = tape.matmul(tape.matmul(weighted, x), out.bound[blk.w]);
    x = tape.add(tape.relu(h), x);
  }
  out.embeddings = l2_normalize_rows(tape, x);
  out.attention = att;
  return out;
}

template <class S>
BoxInference<S> box_infer(const BoxEmbedModelT<S>& model, const BoxGraph& graph) {
  BoxInference<S> out;
  if (graph.size() == 0) {
    out.embeddings = TensorT<S>::zeros({0, model.cfg.channels});
    out.attention = TensorT<S>::zeros({0, 0});
    return out;
  }
  TapeT<S> tape;
  BoxForwardT<S> fwd = box_forward(tape, model, graph);
  out.embeddings = fwd.embeddings.value();
  out.attention = fwd.attention.value();
  return out;
}

template struct BoxEmbedModelT<float>;
template struct BoxEmbedModelT<double>;
template BoxForwardT<float> box_forward<float>(TapeT<float>&, const BoxEmbedModelT<float>&, const BoxGraph&);
template BoxForwardT<double> box_forward<double>(TapeT<double>&, const BoxEmbedModelT<double>&, const BoxGraph&);
template BoxInference<float> box_infer<float>(const BoxEmbedModelT<float>&, const BoxGraph&);
template BoxInference<double> box_infer<double>(const BoxEmbedModelT<double>&, const BoxGraph&);

}  // namespace motrack
