#include "bline/metric.hpp"

#include <algorithm>
#include <stdexcept>

#include "bline/assignment.hpp"

namespace bline {

double pair_similarity(const LineSegment& a, const LineSegment& b,
                       const SimilarityParams& params) {
    if (params.cutoff <= 0.0)
        throw std::invalid_argument("pair_similarity: cutoff must be > 0");
    const double d = segment_hausdorff(a, b);
    return std::max(0.0, 1.0 - d / params.cutoff);
}

Matching optimal_matching(std::span<const LineSegment> set_a,
                          std::span<const LineSegment> set_b,
                          const SimilarityParams& params) {
    Matching m;
    const std::size_t na = set_a.size(), nb = set_b.size();
    if (na == 0 || nb == 0) {
        for (std::size_t i = 0; i < na; ++i) m.unmatched_a.push_back(i);
        for (std::size_t j = 0; j < nb; ++j) m.unmatched_b.push_back(j);
        return m;
    }

    // Maximum similarity == minimum cost with cost = 1 - similarity.
    // The solver wants rows <= cols; swap the sets if needed.
    const bool swapped = na > nb;
    const auto& rows = swapped ? set_b : set_a;
    const auto& cols = swapped ? set_a : set_b;
    const std::size_t nr = rows.size(), nc = cols.size();

    std::vector<double> cost(nr * nc);
    std::vector<double> sim(nr * nc);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            const double s = pair_similarity(rows[i], cols[j], params);
            sim[i * nc + j] = s;
            cost[i * nc + j] = 1.0 - s;
        }
    }
    const std::vector<std::size_t> row_to_col = min_cost_assignment(cost, nr, nc);

    std::vector<char> col_used(nc, 0);
    for (std::size_t i = 0; i < nr; ++i) {
        const std::size_t j = row_to_col[i];
        col_used[j] = 1;
        const double s = sim[i * nc + j];
        if (swapped) {
            m.pairs.push_back({j, i, s});
        } else {
            m.pairs.push_back({i, j, s});
        }
    }
    if (swapped) {
        std::sort(m.pairs.begin(), m.pairs.end(),
                  [](const MatchedPair& x, const MatchedPair& y) { return x.index_a < y.index_a; });
        for (std::size_t j = 0; j < nc; ++j)
            if (!col_used[j]) m.unmatched_a.push_back(j);
    } else {
        for (std::size_t j = 0; j < nc; ++j)
            if (!col_used[j]) m.unmatched_b.push_back(j);
    }
    return m;
}

double dice_h(std::span<const LineSegment> set_a,
              std::span<const LineSegment> set_b,
              const SimilarityParams& params) {
    const std::size_t total = set_a.size() + set_b.size();
    if (total == 0) return 1.0;
    const Matching m = optimal_matching(set_a, set_b, params);
    return 2.0 * m.total_similarity() / static_cast<double>(total);
}

}  // namespace bline
