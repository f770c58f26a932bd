#pragma once

#include <vector>

#include "motrack/autodiff.hpp"
#include "motrack/tensor.hpp"

namespace motrack {

struct LossConfig {
  double margin = 0.2;      // triplet margin on squared distances
  double lambda_box = 1.0;  // similarity-supervision weight in the box loss
  double lambda_att = 1.0;  // similarity-supervision weight in the tracklet loss
  double lambda_rec = 1.0;  // reconstruction weight in the tracklet loss
};

inline constexpr double kBceClampLo = 1e-7;

/// Hardest-positive / hardest-negative triplet loss on squared Euclidean
/// distances between embedding rows. Anchors and positives need a known
/// identity (id >= 0); negatives are any node with a different, non-unknown
/// identity (injected false positives qualify). Mean over valid anchors;
/// zero when no anchor has both a positive and a negative.
template <class S>
VarT<S> triplet_loss(TapeT<S>& tape, VarT<S> embeddings, const std::vector<int>& ids, S margin);

/// Binary cross entropy between the similarity map and identity labels,
/// restricted to supervised pairs ((A + I)_ij = 1) and normalized by their
/// count. The label of pair (i, j) is 1 iff i == j or both ids are equal and
/// known; unknown (-1) and false-positive (-2) ids never match another node.
/// Probabilities are clamped to [1e-7, 1 - 1e-7].
template <class S>
VarT<S> bce_attention_loss(TapeT<S>& tape, VarT<S> attention, const std::vector<int>& ids,
                           const Tensord& adjacency);

/// Masked reconstruction error ||mask * (recon - target)||_2 divided by the
/// number of occupied (node, frame) entries. Zero when the mask is empty.
template <class S>
VarT<S> reconstruction_loss(TapeT<S>& tape, VarT<S> recon, const Tensord& target,
                            const Tensord& mask);

template <class S>
VarT<S> box_total_loss(TapeT<S>& tape, VarT<S> triplet, VarT<S> bce, const LossConfig& cfg) {
  return tape.add(triplet, tape.scale(bce, static_cast<S>(cfg.lambda_box)));
}

template <class S>
VarT<S> tracklet_total_loss(TapeT<S>& tape, VarT<S> triplet, VarT<S> bce, VarT<S> rec,
                            const LossConfig& cfg) {
  return tape.add(tape.add(triplet, tape.scale(bce, static_cast<S>(cfg.lambda_att))),
                  tape.scale(rec, static_cast<S>(cfg.lambda_rec)));
}

extern template VarT<float> triplet_loss<float>(TapeT<float>&, VarT<float>, const std::vector<int>&, float);
extern template VarT<double> triplet_loss<double>(TapeT<double>&, VarT<double>, const std::vector<int>&, double);
extern template VarT<float> bce_attention_loss<float>(TapeT<float>&, VarT<float>, const std::vector<int>&, const Tensord&);
extern template VarT<double> bce_attention_loss<double>(TapeT<double>&, VarT<double>, const std::vector<int>&, const Tensord&);
extern template VarT<float> reconstruction_loss<float>(TapeT<float>&, VarT<float>, const Tensord&, const Tensord&);
extern template VarT<double> reconstruction_loss<double>(TapeT<double>&, VarT<double>, const Tensord&, const Tensord&);

}  // namespace motrack
