#include "motrack/optim.hpp"

#include <cmath>

#include "motrack/errors.hpp"

namespace motrack {

template <class S>
void adam_step(ParamStoreT<S>& params, const std::vector<TensorT<S>>& grads, AdamStateT<S>& state,
               const AdamConfig& cfg, double lr) {
  if (grads.size() != params.tensors.size() || state.m.size() != params.tensors.size())
    throw ContractError("adam_step: gradient/state size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t p = 0; p < params.tensors.size(); ++p) {
    TensorT<S>& w = params.tensors[p];
    const TensorT<S>& g = grads[p];
    if (!g.same_shape(w)) throw ContractError("adam_step: gradient shape mismatch");
    TensorT<S>& m = state.m[p];
    TensorT<S>& v = state.v[p];
    for (int64_t i = 0; i < w.numel(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<S>(mi);
      v[i] = static_cast<S>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      w[i] = static_cast<S>(static_cast<double>(w[i]) - lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
  }
}

double cosine_lr(int64_t step, int64_t max_steps, double base_lr) {
  if (max_steps <= 0) throw ConfigError("cosine_lr: max_steps must be positive");
  if (step <= 0) return base_lr;
  if (step >= max_steps) return 0.0;
  const double t = static_cast<double>(step) / static_cast<double>(max_steps);
  return 0.5 * base_lr * (1.0 + std::cos(3.14159265358979323846 * t));
}

template void adam_step<float>(ParamStoreT<float>&, const std::vector<TensorT<float>>&,
                               AdamStateT<float>&, const AdamConfig&, double);
template void adam_step<double>(ParamStoreT<double>&, const std::vector<TensorT<double>>&,
                                AdamStateT<double>&, const AdamConfig&, double);

}  // namespace motrack
