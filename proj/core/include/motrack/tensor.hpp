#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "motrack/errors.hpp"

namespace motrack {

/// Dense row-major tensor of rank 1 to 3. Element type is double in tests and
/// verification paths; float is used for training where configured.
template <class S>
struct TensorT {
  std::vector<int> shape;
  std::vector<S> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> shp)
      : shape(std::move(shp)), data(static_cast<size_t>(checked_numel(shape)), S(0)) {}

  TensorT(std::vector<int> shp, std::vector<S> values)
      : shape(std::move(shp)), data(std::move(values)) {
    if (static_cast<size_t>(checked_numel(shape)) != data.size())
      throw ShapeError("tensor data size does not match shape");
  }

  static TensorT zeros(std::vector<int> shp) { return TensorT(std::move(shp)); }

  static TensorT full(std::vector<int> shp, S v) {
    TensorT t(std::move(shp));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static TensorT scalar(S v) { return TensorT({1}, {v}); }

  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  S& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const S& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  S& operator()(int i) {
    assert(ndim() == 1);
    return data[static_cast<size_t>(i)];
  }
  const S& operator()(int i) const {
    assert(ndim() == 1);
    return data[static_cast<size_t>(i)];
  }

  S& operator()(int i, int j) {
    assert(ndim() == 2);
    return data[static_cast<size_t>(i) * shape[1] + j];
  }
  const S& operator()(int i, int j) const {
    assert(ndim() == 2);
    return data[static_cast<size_t>(i) * shape[1] + j];
  }

  S& operator()(int i, int j, int k) {
    assert(ndim() == 3);
    return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  const S& operator()(int i, int j, int k) const {
    assert(ndim() == 3);
    return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }

  bool all_finite() const {
    for (const S& v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <class T>
  TensorT<T> cast() const {
    TensorT<T> out(shape);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
    return out;
  }

  static int64_t checked_numel(const std::vector<int>& shp) {
    if (shp.empty() || shp.size() > 3) throw ShapeError("tensor rank must be 1..3");
    int64_t n = 1;
    for (int d : shp) {
      if (d < 0) throw ShapeError("negative tensor dimension");
      n *= d;
    }
    return n;
  }
};

using Tensord = TensorT<double>;
using Tensorf = TensorT<float>;

}  // namespace motrack
