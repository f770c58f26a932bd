#pragma once

#include <functional>
#include <vector>

#include "motrack/autodiff.hpp"

namespace motrack {

struct FdOptions {
  double eps = 1e-5;
  /// 0 checks every coordinate; otherwise at most this many per tensor,
  /// sampled deterministically from `seed`.
  int max_coords_per_tensor = 0;
  uint64_t seed = 0;
  /// Denominator floor for the relative error, absorbing central-difference
  /// rounding noise on near-zero gradients.
  double rel_floor = 1e-5;
  /// Skip coordinates where half-step and full-step central differences
  /// disagree, i.e. the function is locally non-smooth (a relu kink between
  /// the two evaluation points). Skipped counts are reported.
  bool kink_filter = true;
};

struct FdReport {
  double max_rel_err = 0.0;
  int coords_checked = 0;
  int coords_skipped = 0;
};

/// Builds `f` on a fresh tape from leaves holding `params`, returning the
/// scalar loss Var.
template <class S>
using TapeFn = std::function<VarT<S>(TapeT<S>&, const std::vector<VarT<S>>&)>;

/// Compares externally supplied analytic gradients against central finite
/// differences of the forward evaluation.
template <class S>
FdReport finite_difference_compare(const TapeFn<S>& f, const std::vector<TensorT<S>>& params,
                                   const std::vector<TensorT<S>>& analytic_grads,
                                   const FdOptions& opts = {});

/// Runs backward() for the analytic gradients, then checks them against
/// central differences. Returns max relative error over all checked
/// coordinates; the contract for a correct gradient is a small value
/// (Richardson-filtered kinks excluded).
template <class S>
FdReport finite_difference_check(const TapeFn<S>& f, const std::vector<TensorT<S>>& params,
                                 const FdOptions& opts = {});

extern template FdReport finite_difference_compare<float>(const TapeFn<float>&,
                                                          const std::vector<TensorT<float>>&,
                                                          const std::vector<TensorT<float>>&,
                                                          const FdOptions&);
extern template FdReport finite_difference_compare<double>(const TapeFn<double>&,
                                                           const std::vector<TensorT<double>>&,
                                                           const std::vector<TensorT<double>>&,
                                                           const FdOptions&);
extern template FdReport finite_difference_check<float>(const TapeFn<float>&,
                                                        const std::vector<TensorT<float>>&,
                                                        const FdOptions&);
extern template FdReport finite_difference_check<double>(const TapeFn<double>&,
                                                         const std::vector<TensorT<double>>&,
                                                         const FdOptions&);

}  // namespace motrack
