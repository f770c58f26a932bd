#include "motrack/assignment.hpp"

#include <limits>

#include "motrack/errors.hpp"

namespace motrack {
namespace {

// Potential-based Hungarian method, O(rows^2 * cols), for rows <= cols.
// Returns the matched column per row; every row is matched (cols suffice).
std::vector<int> solve_rows_le_cols(const TensorT<double>& cost) {
  const int n = cost.dim(0);
  const int m = cost.dim(1);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(m) + 1, 0);  // column -> row (1-based)
  std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    const int i = match[static_cast<std::size_t>(j)];
    if (i != 0) row_to_col[static_cast<std::size_t>(i) - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<int> solve_assignment(const TensorT<double>& cost) {
  if (cost.ndim() != 2) throw ShapeError("solve_assignment: cost must be rank 2");
  if (!cost.all_finite()) throw ContractError("solve_assignment: non-finite cost");
  const int rows = cost.dim(0);
  const int cols = cost.dim(1);
  if (rows == 0) return {};
  std::vector<int> row_to_col(static_cast<std::size_t>(rows), -1);
  if (cols == 0) return row_to_col;

  if (rows <= cols) {
    row_to_col = solve_rows_le_cols(cost);
  } else {
    TensorT<double> t({cols, rows});
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) t(c, r) = cost(r, c);
    }
    const std::vector<int> col_to_row = solve_rows_le_cols(t);
    for (int c = 0; c < cols; ++c) {
      const int r = col_to_row[static_cast<std::size_t>(c)];
      if (r >= 0) row_to_col[static_cast<std::size_t>(r)] = c;
    }
  }
  for (int r = 0; r < rows; ++r) {
    const int c = row_to_col[static_cast<std::size_t>(r)];
    if (c >= 0 && cost(r, c) >= 0.5 * kForbiddenCost) row_to_col[static_cast<std::size_t>(r)] = -1;
  }
  return row_to_col;
}

}  // namespace motrack
