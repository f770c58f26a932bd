#pragma once

#include <vector>

#include "motrack/tensor.hpp"

namespace motrack {

/// Cost at or above this marks a pair as disallowed; such pairs are never
/// reported even if the solver has to route through them.
inline constexpr double kForbiddenCost = 1e9;

/// Minimum-cost bipartite assignment on a rectangular cost matrix
/// (rows x cols). Returns, per row, the matched column or -1. Unmatchable
/// rows (surplus rows, or rows whose only options are forbidden) get -1.
std::vector<int> solve_assignment(const TensorT<double>& cost);

}  // namespace motrack
