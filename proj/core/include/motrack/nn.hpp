#pragma once

#include <limits>

#include "motrack/autodiff.hpp"

namespace motrack {

/// Shared differentiable building blocks composed from tape primitives.

inline constexpr double kRowNormEps = 1e-12;
inline constexpr double kDegreeEps = 1e-8;

/// Divides each row of x (N x D) by max(||row||, eps). Zero rows stay zero.
template <class S>
VarT<S> l2_normalize_rows(TapeT<S>& tape, VarT<S> x, S eps = S(kRowNormEps)) {
  VarT<S> sq = tape.mul(x, x);
  VarT<S> r = tape.rowsum(sq);
  // max(||row||, eps) == sqrt(max(||row||^2, eps^2))
  VarT<S> guarded = tape.clamp(r, eps * eps, std::numeric_limits<S>::infinity());
  VarT<S> inv = tape.rsqrt(guarded);
  return tape.scale_rows(x, inv);
}

/// Symmetric degree normalization D^{-1/2} A D^{-1/2} with degrees floored at
/// eps so all-zero rows stay zero instead of dividing by zero.
template <class S>
VarT<S> sym_normalize(TapeT<S>& tape, VarT<S> a, S eps = S(kDegreeEps)) {
  VarT<S> d = tape.rowsum(a);
  VarT<S> dc = tape.clamp(d, eps, std::numeric_limits<S>::infinity());
  VarT<S> inv = tape.rsqrt(dc);
  return tape.scale_rows(tape.scale_cols(a, inv), inv);
}

/// Pairwise similarity map from row features: s_ij = <x_i, x_j> * dot_scale,
/// each scalar passed through a shared 1 -> H -> 1 kernel pair
/// (relu then sigmoid), giving an N x N map in (0, 1).
template <class S>
VarT<S> pairwise_attention(TapeT<S>& tape, VarT<S> feats, VarT<S> w1, VarT<S> w2, S dot_scale) {
  const int n = feats.value().dim(0);
  VarT<S> s = tape.scale(tape.matmul(feats, tape.transpose(feats)), dot_scale);
  VarT<S> flat = tape.reshape(s, {n * n, 1});
  VarT<S> hidden = tape.relu(tape.matmul(flat, w1));
  VarT<S> logits = tape.matmul(hidden, w2);
  return tape.sigmoid(tape.reshape(logits, {n, n}));
}

}  // namespace motrack
