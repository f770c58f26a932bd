#pragma once

#include <vector>

#include "motrack/params.hpp"
#include "motrack/tensor.hpp"

namespace motrack {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers aligned with a parameter store.
template <class S>
struct AdamStateT {
  std::vector<TensorT<S>> m;
  std::vector<TensorT<S>> v;
  int64_t step = 0;

  static AdamStateT init(const ParamStoreT<S>& params) {
    AdamStateT st;
    for (const auto& t : params.tensors) {
      st.m.push_back(TensorT<S>::zeros(t.shape));
      st.v.push_back(TensorT<S>::zeros(t.shape));
    }
    return st;
  }
};

/// One Adam update with bias correction. `lr` is the already-scheduled rate.
template <class S>
void adam_step(ParamStoreT<S>& params, const std::vector<TensorT<S>>& grads, AdamStateT<S>& state,
               const AdamConfig& cfg, double lr);

/// Cosine annealing from `base_lr` to 0 over `max_steps`; steps past the end
/// stay at 0.
double cosine_lr(int64_t step, int64_t max_steps, double base_lr);

extern template void adam_step<float>(ParamStoreT<float>&, const std::vector<TensorT<float>>&,
                                      AdamStateT<float>&, const AdamConfig&, double);
extern template void adam_step<double>(ParamStoreT<double>&, const std::vector<TensorT<double>>&,
                                       AdamStateT<double>&, const AdamConfig&, double);

}  // namespace motrack
