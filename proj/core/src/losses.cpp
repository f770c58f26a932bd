#include "motrack/losses.hpp"

#include <utility>

#include "motrack/errors.hpp"

namespace motrack {

namespace {

bool same_identity(int a, int b) { return a >= 0 && a == b; }

}  // namespace

template <class S>
VarT<S> triplet_loss(TapeT<S>& tape, VarT<S> embeddings, const std::vector<int>& ids, S margin) {
  const int n = embeddings.value().dim(0);
  if (static_cast<int>(ids.size()) != n)
    throw ContractError("triplet_loss: ids length does not match embeddings");
  VarT<S> dist = tape.pairwise_sqdist(embeddings);
  const TensorT<S>& d = dist.value();

  std::vector<std::pair<int, int>> ap, an;
  for (int i = 0; i < n; ++i) {
    if (ids[static_cast<size_t>(i)] < 0) continue;
    int hardest_pos = -1, hardest_neg = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (same_identity(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)])) {
        if (hardest_pos < 0 || d(i, j) > d(i, hardest_pos)) hardest_pos = j;
      } else if (ids[static_cast<size_t>(j)] != -1) {
        if (hardest_neg < 0 || d(i, j) < d(i, hardest_neg)) hardest_neg = j;
      }
    }
    if (hardest_pos >= 0 && hardest_neg >= 0) {
      ap.emplace_back(i, hardest_pos);
      an.emplace_back(i, hardest_neg);
    }
  }
  if (ap.empty()) return tape.leaf(TensorT<S>::scalar(S(0)));
  VarT<S> d_ap = tape.gather_pairs(dist, std::move(ap));
  VarT<S> d_an = tape.gather_pairs(dist, std::move(an));
  return tape.mean(tape.relu(tape.add_scalar(tape.sub(d_ap, d_an), margin)));
}

template <class S>
VarT<S> bce_attention_loss(TapeT<S>& tape, VarT<S> attention, const std::vector<int>& ids,
                           const Tensord& adjacency) {
  const int n = attention.value().dim(0);
  if (attention.value().ndim() != 2 || attention.value().dim(1) != n)
    throw ShapeError("bce_attention_loss: attention must be square");
  if (static_cast<int>(ids.size()) != n || adjacency.dim(0) != n || adjacency.dim(1) != n)
    throw ContractError("bce_attention_loss: ids/adjacency do not match attention");

  TensorT<S> labels({n, n});
  TensorT<S> inv_labels({n, n});
  TensorT<S> supervised({n, n});
  int count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool pair_on = i == j || adjacency(i, j) != 0.0;
      const bool positive =
          i == j || same_identity(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
      labels(i, j) = positive ? S(1) : S(0);
      inv_labels(i, j) = positive ? S(0) : S(1);
      supervised(i, j) = pair_on ? S(1) : S(0);
      if (pair_on) ++count;
    }
  if (count == 0) return tape.leaf(TensorT<S>::scalar(S(0)));

  VarT<S> p = tape.clamp(attention, S(kBceClampLo), S(1) - S(kBceClampLo));
  VarT<S> log_p = tape.log(p);
  VarT<S> log_q = tape.log(tape.add_scalar(tape.scale(p, S(-1)), S(1)));
  VarT<S> term = tape.add(tape.mul(tape.leaf(std::move(labels)), log_p),
                          tape.mul(tape.leaf(std::move(inv_labels)), log_q));
  VarT<S> masked = tape.mul(tape.leaf(std::move(supervised)), term);
  return tape.scale(tape.sum(masked), S(-1) / static_cast<S>(count));
}

template <class S>
VarT<S> reconstruction_loss(TapeT<S>& tape, VarT<S> recon, const Tensord& target,
                            const Tensord& mask) {
  const TensorT<S>& r = recon.value();
  if (r.ndim() != 3 || target.ndim() != 3 || mask.ndim() != 3)
    throw ShapeError("reconstruction_loss: expects N x C x T tensors");
  if (target.shape != r.shape || mask.dim(0) != r.dim(0) || mask.dim(1) != 1 ||
      mask.dim(2) != r.dim(2))
    throw ContractError("reconstruction_loss: target/mask do not match reconstruction");
  double count = 0;
  for (int64_t i = 0; i < mask.numel(); ++i) count += mask[i] != 0.0 ? 1.0 : 0.0;
  VarT<S> diff = tape.sub(recon, tape.leaf(target.cast<S>()));
  VarT<S> masked = tape.mul_mask(diff, tape.leaf(mask.cast<S>()));
  VarT<S> norm = tape.sqrt_guard(tape.sum(tape.mul(masked, masked)));
  return tape.scale(norm, S(1) / static_cast<S>(count > 0 ? count : 1.0));
}

template VarT<float> triplet_loss<float>(TapeT<float>&, VarT<float>, const std::vector<int>&, float);
template VarT<double> triplet_loss<double>(TapeT<double>&, VarT<double>, const std::vector<int>&, double);
template VarT<float> bce_attention_loss<float>(TapeT<float>&, VarT<float>, const std::vector<int>&, const Tensord&);
template VarT<double> bce_attention_loss<double>(TapeT<double>&, VarT<double>, const std::vector<int>&, const Tensord&);
template VarT<float> reconstruction_loss<float>(TapeT<float>&, VarT<float>, const Tensord&, const Tensord&);
template VarT<double> reconstruction_loss<double>(TapeT<double>&, VarT<double>, const Tensord&, const Tensord&);

}  // namespace motrack
