#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bline/geometry.hpp"

namespace bline {

// Similarity between two lines decays linearly from 1 at Hausdorff distance
// zero to 0 at `cutoff`. The evaluation variant uses cutoff 5, the in-game
// scoring variant cutoff 10.
struct SimilarityParams {
    double cutoff = 5.0;
};

inline constexpr SimilarityParams kEvalSimilarity{5.0};
inline constexpr SimilarityParams kInGameSimilarity{10.0};

struct MatchedPair {
    std::size_t index_a;
    std::size_t index_b;
    double similarity;
};

// A maximum-total-similarity matching between two line sets. Exactly
// min(|A|,|B|) pairs; zero-similarity pairs are kept so the pair count is
// deterministic for consumers. Leftover lines of the larger set are listed
// as unmatched.
struct Matching {
    std::vector<MatchedPair> pairs;
    std::vector<std::size_t> unmatched_a;
    std::vector<std::size_t> unmatched_b;

    double total_similarity() const {
        double s = 0.0;
        for (const auto& p : pairs) s += p.similarity;
        return s;
    }
};

double pair_similarity(const LineSegment& a, const LineSegment& b,
                       const SimilarityParams& params);

Matching optimal_matching(std::span<const LineSegment> set_a,
                          std::span<const LineSegment> set_b,
                          const SimilarityParams& params);

// Dice-H: 2 * (sum of matched-pair similarities) / (|A| + |B|).
// Two empty sets score 1.0: both annotators reported "no lines" and agree.
double dice_h(std::span<const LineSegment> set_a,
              std::span<const LineSegment> set_b,
              const SimilarityParams& params);

}  // namespace bline
