#pragma once

#include <string>
#include <vector>

#include "motrack/autodiff.hpp"
#include "motrack/rng.hpp"
#include "motrack/tensor.hpp"

namespace motrack {

/// Ordered collection of named parameter tensors. Iteration order is the
/// insertion order, which fixes initialization, checkpoint layout and
/// optimizer state alignment.
template <class S>
struct ParamStoreT {
  std::vector<std::string> names;
  std::vector<TensorT<S>> tensors;

  int add(std::string name, TensorT<S> t) {
    names.push_back(std::move(name));
    tensors.push_back(std::move(t));
    return static_cast<int>(tensors.size()) - 1;
  }

  int index_of(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  TensorT<S>& at(int i) { return tensors[static_cast<size_t>(i)]; }
  const TensorT<S>& at(int i) const { return tensors[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(tensors.size()); }

  int64_t total_scalars() const {
    int64_t n = 0;
    for (const auto& t : tensors) n += t.numel();
    return n;
  }

  template <class T>
  ParamStoreT<T> cast() const {
    ParamStoreT<T> out;
    out.names = names;
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<T>());
    return out;
  }
};

/// Fills a tensor with U(-1/sqrt(fan_in), 1/sqrt(fan_in)) draws in row-major
/// order from the given stream.
template <class S>
void init_uniform_fan_in(TensorT<S>& t, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(rng.uniform(-bound, bound));
}

/// Parameter leaves bound onto a tape, aligned with the store's order.
template <class S>
struct BoundParamsT {
  std::vector<VarT<S>> leaves;

  VarT<S> operator[](int i) const { return leaves[static_cast<size_t>(i)]; }
};

template <class S>
BoundParamsT<S> bind_params(TapeT<S>& tape, const ParamStoreT<S>& store) {
  BoundParamsT<S> bound;
  bound.leaves.reserve(store.tensors.size());
  for (const auto& t : store.tensors) bound.leaves.push_back(tape.leaf(t));
  return bound;
}

using ParamStore = ParamStoreT<double>;

}  // namespace motrack
