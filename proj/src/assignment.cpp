#include "bline/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace bline {

std::vector<std::size_t> min_cost_assignment(const std::vector<double>& cost,
                                             std::size_t n_rows,
                                             std::size_t n_cols) {
    if (n_rows > n_cols)
        throw std::invalid_argument("min_cost_assignment: requires n_rows <= n_cols");
    if (cost.size() != n_rows * n_cols)
        throw std::invalid_argument("min_cost_assignment: cost size mismatch");

    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t nr = n_rows, nc = n_cols;

    // 1-based arrays; column 0 is the virtual root of each augmenting path.
    std::vector<double> u(nr + 1, 0.0), v(nc + 1, 0.0);
    std::vector<std::size_t> col_row(nc + 1, 0);  // row matched to column, 0 = free
    std::vector<std::size_t> way(nc + 1, 0);

    for (std::size_t i = 1; i <= nr; ++i) {
        col_row[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(nc + 1, inf);
        std::vector<char> used(nc + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = col_row[j0];
            std::size_t j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= nc; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * nc + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= nc; ++j) {
                if (used[j]) {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (col_row[j0] != 0);
        // Walk the alternating path back to the root, flipping matches.
        do {
            const std::size_t j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> row_to_col(nr, 0);
    for (std::size_t j = 1; j <= nc; ++j) {
        if (col_row[j] != 0) row_to_col[col_row[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace bline
