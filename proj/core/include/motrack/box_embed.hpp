#pragma once

#include <vector>

#include "motrack/graph.hpp"
#include "motrack/params.hpp"

namespace motrack {

struct BoxEmbedConfig {
  int blocks = 8;      // residual graph-conv blocks
  int channels = 128;  // working and output embedding width
  int att_hidden = 16; // hidden width of the pairwise similarity kernels
};

/// Box embedding network: projects per-box geometry to `channels` features and
/// refines them with `blocks` residual graph convolutions whose edge weights
/// come from a learned pairwise similarity map, masked to frame-adjacent
/// pairs. Output rows are l2 normalized.
template <class S>
struct BoxEmbedModelT {
  BoxEmbedConfig cfg;
  ParamStoreT<S> params;

  struct BlockIdx {
    int w = -1, att_w1 = -1, att_w2 = -1;
  };
  int proj = -1;
  std::vector<BlockIdx> block_idx;

  static BoxEmbedModelT init(const BoxEmbedConfig& cfg, uint64_t seed);

  /// Rebuilds the lookup indices after params were loaded externally.
  void wire();

  template <class T>
  BoxEmbedModelT<T> cast() const {
    BoxEmbedModelT<T> out;
    out.cfg = cfg;
    out.params = params.template cast<T>();
    out.wire();
    return out;
  }
};

template <class S>
struct BoxForwardT {
  VarT<S> embeddings;  // N x C, rows unit norm
  VarT<S> attention;   // N x N similarity map of the last block, in (0,1)
  BoundParamsT<S> bound;
};

/// Runs the network on a tape. The graph must be non-empty.
template <class S>
BoxForwardT<S> box_forward(TapeT<S>& tape, const BoxEmbedModelT<S>& model, const BoxGraph& graph);

/// Convenience inference: plain tensors, no gradients. Empty graphs give
/// empty outputs.
template <class S>
struct BoxInference {
  TensorT<S> embeddings;
  TensorT<S> attention;
};

template <class S>
BoxInference<S> box_infer(const BoxEmbedModelT<S>& model, const BoxGraph& graph);

extern template struct BoxEmbedModelT<float>;
extern template struct BoxEmbedModelT<double>;
extern template BoxForwardT<float> box_forward<float>(TapeT<float>&, const BoxEmbedModelT<float>&, const BoxGraph&);
extern template BoxForwardT<double> box_forward<double>(TapeT<double>&, const BoxEmbedModelT<double>&, const BoxGraph&);
extern template BoxInference<float> box_infer<float>(const BoxEmbedModelT<float>&, const BoxGraph&);
extern template BoxInference<double> box_infer<double>(const BoxEmbedModelT<double>&, const BoxGraph&);

}  // namespace motrack
