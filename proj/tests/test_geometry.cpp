#include <cmath>

#include "bline/geometry.hpp"
#include "bline/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bline;

TEST_CASE("canonical orientation on construction") {
    const LineSegment s({50.0, 90.0}, {50.0, 10.0});
    CHECK(s.top.y == 10.0);
    CHECK(s.bottom.y == 90.0);

    // y tie broken by smaller x as top
    const LineSegment tie({30.0, 50.0}, {10.0, 50.0});
    CHECK(tie.top.x == 10.0);
    CHECK(tie.bottom.x == 30.0);

    const LineSegment degenerate({5.0, 5.0}, {5.0, 5.0});
    CHECK(degenerate.degenerate());
}

TEST_CASE("point_segment_distance examples") {
    const LineSegment s({0.0, 0.0}, {0.0, 10.0});
    CHECK(point_segment_distance({0.0, 0.0}, s) == doctest::Approx(0.0));
    CHECK(point_segment_distance({3.0, 5.0}, s) == doctest::Approx(3.0));
    // closest point is the endpoint (0,10): sqrt(16 + 9) = 5
    CHECK(point_segment_distance({4.0, 13.0}, s) == doctest::Approx(5.0));
}

TEST_CASE("point_segment_distance bounded by endpoint distances") {
    Rng rng(101);
    for (int i = 0; i < 2000; ++i) {
        const LineSegment s = oracles::random_segment(rng);
        const Point2 p = oracles::random_point(rng);
        const double d = point_segment_distance(p, s);
        CHECK(d >= 0.0);
        CHECK(d <= distance(p, s.top) + 1e-12);
        CHECK(d <= distance(p, s.bottom) + 1e-12);
    }
}

TEST_CASE("segment_hausdorff examples") {
    const LineSegment a({50.0, 0.0}, {50.0, 100.0});
    CHECK(segment_hausdorff(a, a) == 0.0);

    const LineSegment b({53.0, 0.0}, {53.0, 100.0});
    CHECK(segment_hausdorff(a, b) == doctest::Approx(3.0));

    // horizontal pair, sup attained at (20,5): sqrt(10^2 + 5^2)
    const LineSegment h1({0.0, 0.0}, {10.0, 0.0});
    const LineSegment h2({0.0, 5.0}, {20.0, 5.0});
    CHECK(segment_hausdorff(h1, h2) == doctest::Approx(std::sqrt(125.0)));
    CHECK(segment_hausdorff(h1, h2) ==
          doctest::Approx(oracles::sampling_hausdorff(h1, h2, 10000)).epsilon(1e-3));
}

TEST_CASE("segment_hausdorff properties on random pairs") {
    Rng rng(202);
    for (int i = 0; i < 1000; ++i) {
        const LineSegment a = oracles::random_segment(rng);
        const LineSegment b = oracles::random_segment(rng);
        const double d = segment_hausdorff(a, b);
        CHECK(d >= 0.0);
        CHECK(d == segment_hausdorff(b, a));

        // translation invariance
        const double tx = rng.uniform(-20.0, 20.0), ty = rng.uniform(-20.0, 20.0);
        const LineSegment at({a.top.x + tx, a.top.y + ty}, {a.bottom.x + tx, a.bottom.y + ty});
        const LineSegment bt({b.top.x + tx, b.top.y + ty}, {b.bottom.x + tx, b.bottom.y + ty});
        CHECK(segment_hausdorff(at, bt) == doctest::Approx(d).epsilon(1e-9));
    }
}

TEST_CASE("segment_hausdorff zero iff identical point sets") {
    const LineSegment a({10.0, 10.0}, {20.0, 30.0});
    const LineSegment same({20.0, 30.0}, {10.0, 10.0});  // same set, flipped input
    CHECK(segment_hausdorff(a, same) == 0.0);

    const LineSegment other({10.0, 10.0}, {20.0, 30.0001});
    CHECK(segment_hausdorff(a, other) > 0.0);
}

TEST_CASE("endpoint formula tracks the dense sampling estimate") {
    Rng rng(303);
    for (int i = 0; i < 200; ++i) {
        const LineSegment a = oracles::random_segment(rng);
        const LineSegment b = oracles::random_segment(rng);
        const std::size_t samples = 2000;
        const double exact = segment_hausdorff(a, b);
        const double estimate = oracles::sampling_hausdorff(a, b, samples);
        const double diameter = std::max(a.length(), b.length());
        CHECK(std::fabs(exact - estimate) <= 2.0 * diameter / static_cast<double>(samples));
        // sampling can only undershoot the supremum
        CHECK(estimate <= exact + 1e-12);
    }
}
