#include "motrack/autodiff.hpp"

#include <cmath>
#include <string>

#include "motrack/errors.hpp"

namespace motrack {

namespace {

std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

[[noreturn]] void shape_fail(const char* op, const std::vector<int>& a) {
  throw ShapeError(std::string(op) + ": bad operand shape " + shape_str(a));
}

[[noreturn]] void shape_fail(const char* op, const std::vector<int>& a, const std::vector<int>& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

template <class S>
S stable_sigmoid(S x) {
  if (x >= S(0)) {
    const S e = std::exp(-x);
    return S(1) / (S(1) + e);
  }
  const S e = std::exp(x);
  return e / (S(1) + e);
}

}  // namespace

template <class S>
typename TapeT<S>::Var TapeT<S>::push(NodeT<S> n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1, this};
}

template <class S>
TensorT<S>& TapeT<S>::grad_buf(int idx) {
  NodeT<S>& n = nodes_[static_cast<size_t>(idx)];
  if (!n.grad_set) {
    n.grad = TensorT<S>::zeros(n.value.shape);
    n.grad_set = true;
  }
  return n.grad;
}

template <class S>
TensorT<S> TapeT<S>::grad(Var v) const {
  const NodeT<S>& n = nodes_[static_cast<size_t>(v.idx)];
  if (n.grad_set) return n.grad;
  return TensorT<S>::zeros(n.value.shape);
}

template <class S>
typename TapeT<S>::Var TapeT<S>::leaf(TensorT<S> v) {
  NodeT<S> n;
  n.op = OpKind::kLeaf;
  n.value = std::move(v);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::add(Var a, Var b) {
  const TensorT<S>& x = value(a);
  const TensorT<S>& y = value(b);
  if (!x.same_shape(y)) shape_fail("add", x.shape, y.shape);
  NodeT<S> n;
  n.op = OpKind::kAdd;
  n.a = a.idx;
  n.b = b.idx;
  n.value = x;
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] += y[i];
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::sub(Var a, Var b) {
  const TensorT<S>& x = value(a);
  const TensorT<S>& y = value(b);
  if (!x.same_shape(y)) shape_fail("sub", x.shape, y.shape);
  NodeT<S> n;
  n.op = OpKind::kSub;
  n.a = a.idx;
  n.b = b.idx;
  n.value = x;
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] -= y[i];
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::mul(Var a, Var b) {
  const TensorT<S>& x = value(a);
  const TensorT<S>& y = value(b);
  if (!x.same_shape(y)) shape_fail("mul", x.shape, y.shape);
  NodeT<S> n;
  n.op = OpKind::kMul;
  n.a = a.idx;
  n.b = b.idx;
  n.value = x;
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] *= y[i];
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::scale(Var a, S c) {
  NodeT<S> n;
  n.op = OpKind::kScale;
  n.a = a.idx;
  n.s0 = c;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] *= c;
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::add_scalar(Var a, S c) {
  NodeT<S> n;
  n.op = OpKind::kAddScalar;
  n.a = a.idx;
  n.s0 = c;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] += c;
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::matmul(Var a, Var b) {
  const TensorT<S>& x = value(a);
  const TensorT<S>& y = value(b);
  if (x.ndim() != 2 || y.ndim() != 2 || x.dim(1) != y.dim(0)) shape_fail("matmul", x.shape, y.shape);
  const int m = x.dim(0), k = x.dim(1), p = y.dim(1);
  NodeT<S> n;
  n.op = OpKind::kMatmul;
  n.a = a.idx;
  n.b = b.idx;
  n.value = TensorT<S>::zeros({m, p});
  for (int i = 0; i < m; ++i)
    for (int t = 0; t < k; ++t) {
      const S xv = x(i, t);
      if (xv == S(0)) continue;
      const S* yr = &y.data[static_cast<size_t>(t) * p];
      S* out = &n.value.data[static_cast<size_t>(i) * p];
      for (int j = 0; j < p; ++j) out[j] += xv * yr[j];
    }
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::transpose(Var a) {
  const TensorT<S>& x = value(a);
  if (x.ndim() != 2) shape_fail("transpose", x.shape);
  const int m = x.dim(0), p = x.dim(1);
  NodeT<S> n;
  n.op = OpKind::kTranspose;
  n.a = a.idx;
  n.value = TensorT<S>::zeros({p, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) n.value(j, i) = x(i, j);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::relu(Var a) {
  NodeT<S> n;
  n.op = OpKind::kRelu;
  n.a = a.idx;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i)
    if (n.value[i] < S(0)) n.value[i] = S(0);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::sigmoid(Var a) {
  NodeT<S> n;
  n.op = OpKind::kSigmoid;
  n.a = a.idx;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] = stable_sigmoid(n.value[i]);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::log(Var a) {
  NodeT<S> n;
  n.op = OpKind::kLog;
  n.a = a.idx;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] = std::log(n.value[i]);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::clamp(Var a, S lo, S hi) {
  NodeT<S> n;
  n.op = OpKind::kClamp;
  n.a = a.idx;
  n.s0 = lo;
  n.s1 = hi;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i) {
    if (n.value[i] < lo) n.value[i] = lo;
    if (n.value[i] > hi) n.value[i] = hi;
  }
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::sqrt_guard(Var a) {
  NodeT<S> n;
  n.op = OpKind::kSqrtGuard;
  n.a = a.idx;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i)
    n.value[i] = n.value[i] > S(0) ? std::sqrt(n.value[i]) : S(0);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::rsqrt(Var a) {
  NodeT<S> n;
  n.op = OpKind::kRsqrt;
  n.a = a.idx;
  n.value = value(a);
  for (int64_t i = 0; i < n.value.numel(); ++i)
    n.value[i] = n.value[i] > S(0) ? S(1) / std::sqrt(n.value[i]) : S(0);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::rowsum(Var a) {
  const TensorT<S>& x = value(a);
  if (x.ndim() != 2) shape_fail("rowsum", x.shape);
  const int m = x.dim(0), p = x.dim(1);
  NodeT<S> n;
  n.op = OpKind::kRowSum;
  n.a = a.idx;
  n.value = TensorT<S>::zeros({m});
  for (int i = 0; i < m; ++i) {
    S s = S(0);
    for (int j = 0; j < p; ++j) s += x(i, j);
    n.value(i) = s;
  }
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::sum(Var a) {
  const TensorT<S>& x = value(a);
  NodeT<S> n;
  n.op = OpKind::kSum;
  n.a = a.idx;
  S s = S(0);
  for (int64_t i = 0; i < x.numel(); ++i) s += x[i];
  n.value = TensorT<S>::scalar(s);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::mean(Var a) {
  const TensorT<S>& x = value(a);
  NodeT<S> n;
  n.op = OpKind::kMean;
  n.a = a.idx;
  S s = S(0);
  for (int64_t i = 0; i < x.numel(); ++i) s += x[i];
  n.value = TensorT<S>::scalar(x.numel() > 0 ? s / static_cast<S>(x.numel()) : S(0));
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::scale_rows(Var a, Var v) {
  const TensorT<S>& x = value(a);
  const TensorT<S>& w = value(v);
  if (x.ndim() != 2 || w.ndim() != 1 || w.dim(0) != x.dim(0)) shape_fail("scale_rows", x.shape, w.shape);
  const int m = x.dim(0), p = x.dim(1);
  NodeT<S> n;
  n.op = OpKind::kScaleRows;
  n.a = a.idx;
  n.b = v.idx;
  n.value = x;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) n.value(i, j) *= w(i);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::scale_cols(Var a, Var v) {
  const TensorT<S>& x = value(a);
  const TensorT<S>& w = value(v);
  if (x.ndim() != 2 || w.ndim() != 1 || w.dim(0) != x.dim(1)) shape_fail("scale_cols", x.shape, w.shape);
  const int m = x.dim(0), p = x.dim(1);
  NodeT<S> n;
  n.op = OpKind::kScaleCols;
  n.a = a.idx;
  n.b = v.idx;
  n.value = x;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) n.value(i, j) *= w(j);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::conv1d(Var x, Var w, Var bias) {
  const TensorT<S>& xv = value(x);
  const TensorT<S>& wv = value(w);
  if (xv.ndim() != 3 || wv.ndim() != 3 || wv.dim(1) != xv.dim(1)) shape_fail("conv1d", xv.shape, wv.shape);
  const int batch = xv.dim(0), cin = xv.dim(1), tlen = xv.dim(2);
  const int cout = wv.dim(0), k = wv.dim(2);
  if (k % 2 == 0) throw ConfigError("conv1d: kernel width must be odd, got " + std::to_string(k));
  const bool has_bias = bias.idx >= 0;
  if (has_bias) {
    const TensorT<S>& bv = value(bias);
    if (bv.ndim() != 1 || bv.dim(0) != cout) shape_fail("conv1d bias", bv.shape, wv.shape);
  }
  const int c0 = (k - 1) / 2;
  NodeT<S> n;
  n.op = OpKind::kConv1d;
  n.a = x.idx;
  n.b = w.idx;
  n.c = has_bias ? bias.idx : -1;
  n.value = TensorT<S>::zeros({batch, cout, tlen});
  for (int nb = 0; nb < batch; ++nb)
    for (int o = 0; o < cout; ++o) {
      const S b0 = has_bias ? value(bias)(o) : S(0);
      for (int t = 0; t < tlen; ++t) {
        S acc = b0;
        for (int ci = 0; ci < cin; ++ci)
          for (int d = 0; d < k; ++d) {
            const int s = t + d - c0;
            if (s < 0 || s >= tlen) continue;
            acc += xv(nb, ci, s) * wv(o, ci, d);
          }
        n.value(nb, o, t) = acc;
      }
    }
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::conv1d(Var x, Var w) {
  return conv1d(x, w, Var{-1, this});
}

template <class S>
typename TapeT<S>::Var TapeT<S>::mul_mask(Var x, Var m) {
  const TensorT<S>& xv = value(x);
  const TensorT<S>& mv = value(m);
  if (xv.ndim() != 3 || mv.ndim() != 3 || mv.dim(1) != 1 || mv.dim(0) != xv.dim(0) ||
      mv.dim(2) != xv.dim(2))
    shape_fail("mul_mask", xv.shape, mv.shape);
  const int batch = xv.dim(0), ch = xv.dim(1), tlen = xv.dim(2);
  NodeT<S> n;
  n.op = OpKind::kMulMask;
  n.a = x.idx;
  n.b = m.idx;
  n.value = xv;
  for (int nb = 0; nb < batch; ++nb)
    for (int c = 0; c < ch; ++c)
      for (int t = 0; t < tlen; ++t) n.value(nb, c, t) *= mv(nb, 0, t);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::reshape(Var a, std::vector<int> shape) {
  const TensorT<S>& x = value(a);
  if (TensorT<S>::checked_numel(shape) != x.numel()) shape_fail("reshape", x.shape, shape);
  NodeT<S> n;
  n.op = OpKind::kReshape;
  n.a = a.idx;
  n.value = TensorT<S>(std::move(shape), x.data);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::gather_pairs(Var a, std::vector<std::pair<int, int>> ij) {
  const TensorT<S>& x = value(a);
  if (x.ndim() != 2) shape_fail("gather_pairs", x.shape);
  NodeT<S> n;
  n.op = OpKind::kGatherPairs;
  n.a = a.idx;
  n.value = TensorT<S>::zeros({static_cast<int>(ij.size())});
  for (size_t t = 0; t < ij.size(); ++t) {
    const auto [i, j] = ij[t];
    if (i < 0 || i >= x.dim(0) || j < 0 || j >= x.dim(1))
      throw ShapeError("gather_pairs: index out of range");
    n.value[static_cast<int64_t>(t)] = x(i, j);
  }
  n.pairs = std::move(ij);
  return push(std::move(n));
}

template <class S>
typename TapeT<S>::Var TapeT<S>::pairwise_sqdist(Var a) {
  const TensorT<S>& x = value(a);
  if (x.ndim() != 2) shape_fail("pairwise_sqdist", x.shape);
  const int m = x.dim(0), d = x.dim(1);
  NodeT<S> n;
  n.op = OpKind::kPairwiseSqdist;
  n.a = a.idx;
  n.value = TensorT<S>::zeros({m, m});
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      S s = S(0);
      for (int c = 0; c < d; ++c) {
        const S diff = x(i, c) - x(j, c);
        s += diff * diff;
      }
      n.value(i, j) = s;
      n.value(j, i) = s;
    }
  return push(std::move(n));
}

template <class S>
void TapeT<S>::backward(Var loss) {
  if (!loss.valid() || loss.tape != this) throw ContractError("backward: loss not on this tape");
  if (value(loss).numel() != 1) throw ContractError("backward: loss must be scalar");
  for (NodeT<S>& n : nodes_) n.grad_set = false;
  grad_buf(loss.idx)[0] = S(1);

  for (int i = loss.idx; i >= 0; --i) {
    NodeT<S>& n = nodes_[static_cast<size_t>(i)];
    if (!n.grad_set || n.op == OpKind::kLeaf) continue;
    const TensorT<S>& g = n.grad;
    switch (n.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kAdd: {
        TensorT<S>& da = grad_buf(n.a);
        TensorT<S>& db = grad_buf(n.b);
        for (int64_t t = 0; t < g.numel(); ++t) {
          da[t] += g[t];
          db[t] += g[t];
        }
        break;
      }
      case OpKind::kSub: {
        TensorT<S>& da = grad_buf(n.a);
        TensorT<S>& db = grad_buf(n.b);
        for (int64_t t = 0; t < g.numel(); ++t) {
          da[t] += g[t];
          db[t] -= g[t];
        }
        break;
      }
      case OpKind::kMul: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        const TensorT<S>& xb = nodes_[static_cast<size_t>(n.b)].value;
        TensorT<S>& da = grad_buf(n.a);
        TensorT<S>& db = grad_buf(n.b);
        for (int64_t t = 0; t < g.numel(); ++t) {
          da[t] += g[t] * xb[t];
          db[t] += g[t] * xa[t];
        }
        break;
      }
      case OpKind::kScale: {
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t) da[t] += g[t] * n.s0;
        break;
      }
      case OpKind::kAddScalar: {
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t) da[t] += g[t];
        break;
      }
      case OpKind::kMatmul: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        const TensorT<S>& xb = nodes_[static_cast<size_t>(n.b)].value;
        TensorT<S>& da = grad_buf(n.a);
        TensorT<S>& db = grad_buf(n.b);
        const int m = xa.dim(0), k = xa.dim(1), p = xb.dim(1);
        for (int i2 = 0; i2 < m; ++i2)
          for (int t = 0; t < k; ++t) {
            S acc = S(0);
            const S* gr = &g.data[static_cast<size_t>(i2) * p];
            const S* br = &xb.data[static_cast<size_t>(t) * p];
            for (int j = 0; j < p; ++j) acc += gr[j] * br[j];
            da(i2, t) += acc;
          }
        for (int t = 0; t < k; ++t)
          for (int i2 = 0; i2 < m; ++i2) {
            const S av = xa(i2, t);
            if (av == S(0)) continue;
            const S* gr = &g.data[static_cast<size_t>(i2) * p];
            S* dbr = &db.data[static_cast<size_t>(t) * p];
            for (int j = 0; j < p; ++j) dbr[j] += av * gr[j];
          }
        break;
      }
      case OpKind::kTranspose: {
        TensorT<S>& da = grad_buf(n.a);
        const int m = da.dim(0), p = da.dim(1);
        for (int i2 = 0; i2 < m; ++i2)
          for (int j = 0; j < p; ++j) da(i2, j) += g(j, i2);
        break;
      }
      case OpKind::kRelu: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t)
          if (xa[t] > S(0)) da[t] += g[t];
        break;
      }
      case OpKind::kSigmoid: {
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t) da[t] += g[t] * n.value[t] * (S(1) - n.value[t]);
        break;
      }
      case OpKind::kLog: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t) da[t] += g[t] / xa[t];
        break;
      }
      case OpKind::kClamp: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t)
          if (xa[t] > n.s0 && xa[t] < n.s1) da[t] += g[t];
        break;
      }
      case OpKind::kSqrtGuard: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t)
          if (xa[t] > S(0)) da[t] += g[t] / (S(2) * n.value[t]);
        break;
      }
      case OpKind::kRsqrt: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t)
          if (xa[t] > S(0)) da[t] += g[t] * S(-0.5) * n.value[t] * n.value[t] * n.value[t];
        break;
      }
      case OpKind::kRowSum: {
        TensorT<S>& da = grad_buf(n.a);
        const int m = da.dim(0), p = da.dim(1);
        for (int i2 = 0; i2 < m; ++i2)
          for (int j = 0; j < p; ++j) da(i2, j) += g(i2);
        break;
      }
      case OpKind::kSum: {
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < da.numel(); ++t) da[t] += g[0];
        break;
      }
      case OpKind::kMean: {
        TensorT<S>& da = grad_buf(n.a);
        if (da.numel() > 0) {
          const S inv = S(1) / static_cast<S>(da.numel());
          for (int64_t t = 0; t < da.numel(); ++t) da[t] += g[0] * inv;
        }
        break;
      }
      case OpKind::kScaleRows: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        const TensorT<S>& xv = nodes_[static_cast<size_t>(n.b)].value;
        TensorT<S>& da = grad_buf(n.a);
        TensorT<S>& dv = grad_buf(n.b);
        const int m = xa.dim(0), p = xa.dim(1);
        for (int i2 = 0; i2 < m; ++i2)
          for (int j = 0; j < p; ++j) {
            da(i2, j) += g(i2, j) * xv(i2);
            dv(i2) += g(i2, j) * xa(i2, j);
          }
        break;
      }
      case OpKind::kScaleCols: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        const TensorT<S>& xv = nodes_[static_cast<size_t>(n.b)].value;
        TensorT<S>& da = grad_buf(n.a);
        TensorT<S>& dv = grad_buf(n.b);
        const int m = xa.dim(0), p = xa.dim(1);
        for (int i2 = 0; i2 < m; ++i2)
          for (int j = 0; j < p; ++j) {
            da(i2, j) += g(i2, j) * xv(j);
            dv(j) += g(i2, j) * xa(i2, j);
          }
        break;
      }
      case OpKind::kConv1d: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        const TensorT<S>& wv = nodes_[static_cast<size_t>(n.b)].value;
        TensorT<S>& dx = grad_buf(n.a);
        TensorT<S>& dw = grad_buf(n.b);
        TensorT<S>* db = n.c >= 0 ? &grad_buf(n.c) : nullptr;
        const int batch = xa.dim(0), cin = xa.dim(1), tlen = xa.dim(2);
        const int cout = wv.dim(0), k = wv.dim(2);
        const int c0 = (k - 1) / 2;
        for (int nb = 0; nb < batch; ++nb)
          for (int o = 0; o < cout; ++o)
            for (int t = 0; t < tlen; ++t) {
              const S gv = g(nb, o, t);
              if (gv == S(0)) continue;
              if (db) (*db)(o) += gv;
              for (int ci = 0; ci < cin; ++ci)
                for (int d = 0; d < k; ++d) {
                  const int s = t + d - c0;
                  if (s < 0 || s >= tlen) continue;
                  dw(o, ci, d) += gv * xa(nb, ci, s);
                  dx(nb, ci, s) += gv * wv(o, ci, d);
                }
            }
        break;
      }
      case OpKind::kMulMask: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        const TensorT<S>& mv = nodes_[static_cast<size_t>(n.b)].value;
        TensorT<S>& dx = grad_buf(n.a);
        TensorT<S>& dm = grad_buf(n.b);
        const int batch = xa.dim(0), ch = xa.dim(1), tlen = xa.dim(2);
        for (int nb = 0; nb < batch; ++nb)
          for (int c = 0; c < ch; ++c)
            for (int t = 0; t < tlen; ++t) {
              const S gv = g(nb, c, t);
              dx(nb, c, t) += gv * mv(nb, 0, t);
              dm(nb, 0, t) += gv * xa(nb, c, t);
            }
        break;
      }
      case OpKind::kReshape: {
        TensorT<S>& da = grad_buf(n.a);
        for (int64_t t = 0; t < g.numel(); ++t) da[t] += g[t];
        break;
      }
      case OpKind::kGatherPairs: {
        TensorT<S>& da = grad_buf(n.a);
        for (size_t t = 0; t < n.pairs.size(); ++t)
          da(n.pairs[t].first, n.pairs[t].second) += g[static_cast<int64_t>(t)];
        break;
      }
      case OpKind::kPairwiseSqdist: {
        const TensorT<S>& xa = nodes_[static_cast<size_t>(n.a)].value;
        TensorT<S>& da = grad_buf(n.a);
        const int m = xa.dim(0), d = xa.dim(1);
        for (int i2 = 0; i2 < m; ++i2)
          for (int j = 0; j < m; ++j) {
            if (i2 == j) continue;
            const S c = S(2) * (g(i2, j) + g(j, i2));
            if (c == S(0)) continue;
            for (int t = 0; t < d; ++t) da(i2, t) += c * (xa(i2, t) - xa(j, t));
          }
        break;
      }
    }
  }
}

template class TapeT<float>;
template class TapeT<double>;

}  // namespace motrack
