#pragma once

#include <utility>
#include <vector>

#include "motrack/tensor.hpp"

namespace motrack {

enum class OpKind {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kMatmul,
  kTranspose,
  kRelu,
  kSigmoid,
  kLog,
  kClamp,
  kSqrtGuard,
  kRsqrt,
  kRowSum,
  kSum,
  kMean,
  kScaleRows,
  kScaleCols,
  kConv1d,
  kMulMask,
  kReshape,
  kGatherPairs,
  kPairwiseSqdist,
};

template <class S>
class TapeT;

/// Lightweight handle to a node on a tape. Valid only while the owning tape is
/// alive; do not hold value()/grad() references across further op calls.
template <class S>
struct VarT {
  int idx = -1;
  TapeT<S>* tape = nullptr;

  bool valid() const { return idx >= 0 && tape != nullptr; }
  const TensorT<S>& value() const;
  /// Zero tensor of the node's shape when the node was not reached by
  /// backward().
  TensorT<S> grad() const;
};

template <class S>
struct NodeT {
  OpKind op = OpKind::kLeaf;
  int a = -1, b = -1, c = -1;
  S s0 = S(0), s1 = S(0);
  std::vector<std::pair<int, int>> pairs;  // kGatherPairs only
  TensorT<S> value;
  TensorT<S> grad;
  bool grad_set = false;
};

/// Eagerly evaluated computation tape with reverse-mode gradients. Each op
/// records its inputs and result; backward() walks the tape once in reverse
/// creation order. A tape is confined to a single thread.
template <class S>
class TapeT {
 public:
  using Var = VarT<S>;

  Var leaf(TensorT<S> v);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, S c);
  Var add_scalar(Var a, S c);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var log(Var a);
  Var clamp(Var a, S lo, S hi);
  /// sqrt(max(x, 0)) with zero gradient at and below zero.
  Var sqrt_guard(Var a);
  /// x^(-1/2); inputs must be positive (guard with clamp beforehand).
  Var rsqrt(Var a);
  Var rowsum(Var a);
  Var sum(Var a);
  Var mean(Var a);
  /// Multiplies row i of a (m x n) by v(i) (length m).
  Var scale_rows(Var a, Var v);
  /// Multiplies column j of a (m x n) by v(j) (length n).
  Var scale_cols(Var a, Var v);
  /// 1-D cross-correlation over the last axis with "same" zero padding.
  /// x: N x C_in x T, w: C_out x C_in x k (k odd), optional bias length C_out.
  Var conv1d(Var x, Var w, Var bias);
  Var conv1d(Var x, Var w);
  /// Broadcast multiply of features N x C x T by a single-channel map N x 1 x T.
  Var mul_mask(Var x, Var m);
  Var reshape(Var a, std::vector<int> shape);
  /// Picks entries (i, j) of a matrix into a vector, in the given order.
  Var gather_pairs(Var a, std::vector<std::pair<int, int>> ij);
  /// All pairwise squared Euclidean distances between rows of a (N x D) -> N x N.
  Var pairwise_sqdist(Var a);

  /// Reverse-mode sweep from a scalar loss. Resets any previous gradients,
  /// visits each node at most once, and leaves gradients of unreached leaves
  /// zero. Throws ContractError if loss is not scalar.
  void backward(Var loss);

  const TensorT<S>& value(Var v) const { return nodes_[static_cast<size_t>(v.idx)].value; }
  TensorT<S> grad(Var v) const;
  size_t size() const { return nodes_.size(); }

 private:
  friend struct VarT<S>;
  Var push(NodeT<S> n);
  TensorT<S>& grad_buf(int idx);

  std::vector<NodeT<S>> nodes_;
};

template <class S>
const TensorT<S>& VarT<S>::value() const {
  return tape->value(*this);
}

template <class S>
TensorT<S> VarT<S>::grad() const {
  return tape->grad(*this);
}

using Tape = TapeT<double>;
using Var = VarT<double>;

extern template class TapeT<float>;
extern template class TapeT<double>;

}  // namespace motrack
