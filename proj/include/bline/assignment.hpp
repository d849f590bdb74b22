#pragma once

#include <cstddef>
#include <vector>

namespace bline {

// Dense rectangular linear assignment, Jonker-Volgenant style shortest
// augmenting paths with dual potentials. Requires n_rows <= n_cols; every
// row is assigned a distinct column and total cost is minimized.
//
// cost is row-major with n_rows * n_cols entries. Returns row_to_col.
std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost,
                                             std::size_t n_rows,
                                             std::size_t n_cols);

}  // namespace bline
