#pragma once

#include <vector>

#include "motrack/graph.hpp"
#include "motrack/params.hpp"

namespace motrack {

struct TrackletEmbedConfig {
  int recon_blocks = 4;   // reconstruct-then-aggregate blocks
  int tgc_layers = 6;     // gated temporal conv layers per module
  int tgc_hidden = 32;    // internal channel width of the gated convs
  int kernel = 3;         // temporal kernel width, odd
  int att_hidden = 16;    // hidden width of the pairwise similarity kernels
  int embed_hidden = 256; // hidden width of the embedding head
  int embed_dim = 128;    // output embedding dimension
  int window = 65;        // frame window length T baked into the head
};

/// Tracklet embedding network. Each block extrapolates the node trajectories
/// with a gated temporal conv module, computes a pairwise similarity map from
/// the extrapolation, aggregates trajectories and occupancy across
/// similarity-weighted temporally-disjoint neighbors, and adds the result
/// residually. A final head flattens the reconstructed trajectory and maps it
/// to a unit-norm embedding.
template <class S>
struct TrackletEmbedModelT {
  TrackletEmbedConfig cfg;
  ParamStoreT<S> params;

  struct LayerIdx {
    int wm = -1, bm = -1, wy = -1, by = -1, proj = -1;  // proj < 0: identity residual
  };
  struct BlockIdx {
    std::vector<LayerIdx> g1, g2;
    int att_w1 = -1, att_w2 = -1;
  };
  std::vector<BlockIdx> block_idx;
  int embed_w1 = -1, embed_w2 = -1;

  static TrackletEmbedModelT init(const TrackletEmbedConfig& cfg, uint64_t seed);
  void wire();

  template <class T>
  TrackletEmbedModelT<T> cast() const {
    TrackletEmbedModelT<T> out;
    out.cfg = cfg;
    out.params = params.template cast<T>();
    out.wire();
    return out;
  }
};

template <class S>
struct TrackletForwardT {
  VarT<S> embeddings;      // N x D, rows unit norm
  VarT<S> reconstruction;  // N x 4 x T
  VarT<S> mask;            // N x 1 x T, soft occupancy after the last block
  VarT<S> attention;       // N x N similarity map of the last block
  BoundParamsT<S> bound;
};

template <class S>
TrackletForwardT<S> tracklet_forward(TapeT<S>& tape, const TrackletEmbedModelT<S>& model,
                                     const TrackletGraph& graph);

template <class S>
struct TrackletInference {
  TensorT<S> embeddings;
  TensorT<S> reconstruction;
  TensorT<S> mask;
  TensorT<S> attention;
};

template <class S>
TrackletInference<S> tracklet_infer(const TrackletEmbedModelT<S>& model, const TrackletGraph& graph);

extern template struct TrackletEmbedModelT<float>;
extern template struct TrackletEmbedModelT<double>;
extern template TrackletForwardT<float> tracklet_forward<float>(TapeT<float>&, const TrackletEmbedModelT<float>&, const TrackletGraph&);
extern template TrackletForwardT<double> tracklet_forward<double>(TapeT<double>&, const TrackletEmbedModelT<double>&, const TrackletGraph&);
extern template TrackletInference<float> tracklet_infer<float>(const TrackletEmbedModelT<float>&, const TrackletGraph&);
extern template TrackletInference<double> tracklet_infer<double>(const TrackletEmbedModelT<double>&, const TrackletGraph&);

}  // namespace motrack
