#include <algorithm>
#include <set>

#include "bline/metric.hpp"
#include "bline/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bline;

namespace {

// Two vertical lines offset horizontally sit at exactly that Hausdorff
// distance apart.
LineSegment vertical(double x) { return {{x, 0.0}, {x, 100.0}}; }

}  // namespace

TEST_CASE("pair_similarity linear decay") {
    const SimilarityParams p5{5.0};
    CHECK(pair_similarity(vertical(50.0), vertical(50.0), p5) == 1.0);
    CHECK(pair_similarity(vertical(50.0), vertical(55.0), p5) == 0.0);
    CHECK(pair_similarity(vertical(50.0), vertical(52.5), p5) == doctest::Approx(0.5));
    CHECK(pair_similarity(vertical(50.0), vertical(70.0), p5) == 0.0);  // clamped at 0
    CHECK_THROWS_AS(pair_similarity(vertical(0.0), vertical(1.0), SimilarityParams{0.0}),
                    std::invalid_argument);
}

TEST_CASE("optimal_matching edges") {
    const SimilarityParams params{5.0};
    const std::vector<LineSegment> empty;
    const std::vector<LineSegment> two{vertical(10.0), vertical(90.0)};

    const Matching m0 = optimal_matching(empty, two, params);
    CHECK(m0.pairs.empty());
    CHECK(m0.unmatched_a.empty());
    CHECK(m0.unmatched_b == std::vector<std::size_t>{0, 1});

    const std::vector<LineSegment> one_a{vertical(10.0)};
    const std::vector<LineSegment> one_b{vertical(11.0)};
    const Matching m1 = optimal_matching(one_a, one_b, params);
    REQUIRE(m1.pairs.size() == 1);
    CHECK(m1.pairs[0].index_a == 0);
    CHECK(m1.pairs[0].index_b == 0);
    CHECK(m1.pairs[0].similarity == doctest::Approx(0.8));
}

TEST_CASE("optimal_matching structure invariants") {
    Rng rng(404);
    const SimilarityParams params{5.0};
    for (int iter = 0; iter < 500; ++iter) {
        const auto a = oracles::random_line_set(rng, 6);
        const auto b = oracles::random_line_set(rng, 6);
        const Matching m = optimal_matching(a, b, params);
        CHECK(m.pairs.size() == std::min(a.size(), b.size()));
        CHECK(m.pairs.size() + m.unmatched_a.size() == a.size());
        CHECK(m.pairs.size() + m.unmatched_b.size() == b.size());

        std::set<std::size_t> seen_a, seen_b;
        for (const auto& p : m.pairs) {
            CHECK(seen_a.insert(p.index_a).second);
            CHECK(seen_b.insert(p.index_b).second);
            CHECK(p.similarity >= 0.0);
            CHECK(p.similarity <= 1.0);
        }
        for (const auto i : m.unmatched_a) CHECK(seen_a.insert(i).second);
        for (const auto j : m.unmatched_b) CHECK(seen_b.insert(j).second);
    }
}

TEST_CASE("optimal_matching equals brute force on small instances") {
    Rng rng(505);
    const SimilarityParams params{5.0};
    for (int iter = 0; iter < 200; ++iter) {
        const auto a = oracles::random_line_set(rng, 6);
        const auto b = oracles::random_line_set(rng, 6);
        const double via_solver = optimal_matching(a, b, params).total_similarity();
        const double via_enumeration = oracles::brute_force_best_similarity(a, b, params);
        CHECK(via_solver == doctest::Approx(via_enumeration).epsilon(1e-12));
    }
}

TEST_CASE("dice_h examples") {
    const SimilarityParams params{5.0};
    const std::vector<LineSegment> pair{vertical(20.0), vertical(80.0)};
    CHECK(dice_h(pair, pair, params) == 1.0);

    const std::vector<LineSegment> empty;
    CHECK(dice_h(pair, empty, params) == 0.0);
    CHECK(dice_h(empty, pair, params) == 0.0);
    CHECK(dice_h(empty, empty, params) == 1.0);

    // two lines vs one coinciding line: 2 * 1 / (2 + 1)
    const std::vector<LineSegment> one{vertical(20.0)};
    CHECK(dice_h(pair, one, params) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("dice_h property suite") {
    Rng rng(606);
    const SimilarityParams p5{5.0};
    const SimilarityParams p10{10.0};
    for (int iter = 0; iter < 1000; ++iter) {
        const auto a = oracles::random_line_set(rng, 6);
        const auto b = oracles::random_line_set(rng, 6);

        const double score = dice_h(a, b, p5);
        CHECK(score >= 0.0);
        CHECK(score <= 1.0);
        CHECK(score == doctest::Approx(dice_h(b, a, p5)).epsilon(1e-12));
        CHECK(dice_h(a, a, p5) == doctest::Approx(1.0));

        // permutation invariance
        auto a_shuffled = a;
        for (std::size_t i = a_shuffled.size(); i > 1; --i)
            std::swap(a_shuffled[i - 1], a_shuffled[rng.below(i)]);
        CHECK(dice_h(a_shuffled, b, p5) == doctest::Approx(score).epsilon(1e-12));

        // widening the cutoff never lowers the score
        CHECK(dice_h(a, b, p10) >= score - 1e-12);

        // zero-similarity pairs contribute nothing: recomputing the score
        // from non-zero pairs only must agree
        const Matching m = optimal_matching(a, b, p5);
        double nonzero_total = 0.0;
        for (const auto& p : m.pairs)
            if (p.similarity > 0.0) nonzero_total += p.similarity;
        if (!a.empty() || !b.empty()) {
            const double recomputed =
                2.0 * nonzero_total / static_cast<double>(a.size() + b.size());
            CHECK(recomputed == doctest::Approx(score).epsilon(1e-12));
        }
    }
}
