#include "motrack/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "motrack/errors.hpp"
#include "motrack/rng.hpp"

namespace motrack {

namespace {

template <class S>
double eval_scalar(const TapeFn<S>& f, const std::vector<TensorT<S>>& params) {
  TapeT<S> tape;
  std::vector<VarT<S>> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.leaf(p));
  VarT<S> out = f(tape, leaves);
  if (out.value().numel() != 1) throw ContractError("finite difference check: f must be scalar");
  return static_cast<double>(out.value()[0]);
}

std::vector<int64_t> pick_coords(int64_t numel, int max_coords, Rng& rng) {
  std::vector<int64_t> coords;
  if (max_coords <= 0 || numel <= max_coords) {
    coords.resize(static_cast<size_t>(numel));
    for (int64_t i = 0; i < numel; ++i) coords[static_cast<size_t>(i)] = i;
    return coords;
  }
  // Sample without replacement; numel stays small enough for a rejection loop.
  std::vector<char> used(static_cast<size_t>(numel), 0);
  while (static_cast<int>(coords.size()) < max_coords) {
    const int64_t i = static_cast<int64_t>(rng.raw() % static_cast<uint64_t>(numel));
    if (used[static_cast<size_t>(i)]) continue;
    used[static_cast<size_t>(i)] = 1;
    coords.push_back(i);
  }
  std::sort(coords.begin(), coords.end());
  return coords;
}

}  // namespace

template <class S>
FdReport finite_difference_compare(const TapeFn<S>& f, const std::vector<TensorT<S>>& params,
                                   const std::vector<TensorT<S>>& analytic_grads,
                                   const FdOptions& opts) {
  if (analytic_grads.size() != params.size())
    throw ContractError("finite difference check: gradient count mismatch");
  FdReport report;
  Rng rng(opts.seed);
  std::vector<TensorT<S>> work = params;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const auto coords = pick_coords(params[pi].numel(), opts.max_coords_per_tensor, rng);
    for (int64_t ci : coords) {
      const S saved = work[pi][ci];
      auto central = [&](double eps) {
        work[pi][ci] = saved + static_cast<S>(eps);
        const double hi = eval_scalar(f, work);
        work[pi][ci] = saved - static_cast<S>(eps);
        const double lo = eval_scalar(f, work);
        work[pi][ci] = saved;
        return (hi - lo) / (2.0 * eps);
      };
      const double fd = central(opts.eps);
      if (opts.kink_filter) {
        const double fd_half = central(opts.eps / 2.0);
        const double scale = std::max({std::abs(fd), std::abs(fd_half), opts.rel_floor});
        if (std::abs(fd - fd_half) > 0.1 * scale) {
          ++report.coords_skipped;
          continue;
        }
      }
      const double an = static_cast<double>(analytic_grads[pi][ci]);
      const double err = std::abs(an - fd) / std::max(std::abs(fd), opts.rel_floor);
      report.max_rel_err = std::max(report.max_rel_err, err);
      ++report.coords_checked;
    }
  }
  return report;
}

template <class S>
FdReport finite_difference_check(const TapeFn<S>& f, const std::vector<TensorT<S>>& params,
                                 const FdOptions& opts) {
  TapeT<S> tape;
  std::vector<VarT<S>> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.leaf(p));
  VarT<S> out = f(tape, leaves);
  if (out.value().numel() != 1) throw ContractError("finite difference check: f must be scalar");
  tape.backward(out);
  std::vector<TensorT<S>> grads;
  grads.reserve(leaves.size());
  for (const auto& leaf : leaves) grads.push_back(tape.grad(leaf));
  return finite_difference_compare<S>(f, params, grads, opts);
}

template FdReport finite_difference_compare<float>(const TapeFn<float>&,
                                                   const std::vector<TensorT<float>>&,
                                                   const std::vector<TensorT<float>>&,
                                                   const FdOptions&);
template FdReport finite_difference_compare<double>(const TapeFn<double>&,
                                                    const std::vector<TensorT<double>>&,
                                                    const std::vector<TensorT<double>>&,
                                                    const FdOptions&);
template FdReport finite_difference_check<float>(const TapeFn<float>&,
                                                 const std::vector<TensorT<float>>&,
                                                 const FdOptions&);
template FdReport finite_difference_check<double>(const TapeFn<double>&,
                                                  const std::vector<TensorT<double>>&,
                                                  const FdOptions&);

}  // namespace motrack
