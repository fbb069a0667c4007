#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "martinet/distance.hpp"
#include "support.hpp"

using namespace martinet;

namespace {

const MartinetProfile heis = MartinetProfile::heisenberg();
const MartinetProfile mart = MartinetProfile::martinet();
const MartinetProfile cubic = MartinetProfile::monomial(3);

CcOptions quick(int segments = 16, int starts = 4, std::uint64_t seed = 0) {
    CcOptions o;
    o.segments = segments;
    o.starts = starts;
    o.seed = seed;
    return o;
}

}  // namespace

TEST(BracketOrder, ReferenceExamples) {
    EXPECT_EQ(bracket_order(heis, 3.0), 1);
    EXPECT_EQ(bracket_order(mart, 0.0), 2);
    EXPECT_EQ(bracket_order(mart, 0.5), 1);
    EXPECT_EQ(bracket_order(cubic, 0.0), 3);
    EXPECT_EQ(bracket_order(MartinetProfile::monomial(5), 0.0), 5);
}

TEST(BallBox, ReferenceExamples) {
    EXPECT_EQ(ball_box_distance({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, mart), 0.0);
    EXPECT_DOUBLE_EQ(ball_box_distance({0, 0, 0}, {0, 0, 0.008}, mart), 0.2);
    EXPECT_EQ(ball_box_distance({0, 0, 0}, {1, 0, 0}, heis), 1.0);
    EXPECT_DOUBLE_EQ(ball_box_distance({0, 0, 0}, {0.5, -0.5, 0.25}, heis), 1.5);
}

TEST(BallBox, OrderTakenAtFirstPoint) {
    // r = 2 at x1 = 0, r = 1 at x1 = 1
    EXPECT_DOUBLE_EQ(ball_box_distance({0, 0, 0}, {0, 0, 0.001}, mart), 0.1);
    EXPECT_DOUBLE_EQ(ball_box_distance({1, 0, 0}, {1, 0, 0.0001}, mart), 0.01);
}

TEST(ControlCurve, IntegratesHorizontally) {
    ControlCurve c;
    c.start = {0, 0, 0};
    c.u1.assign(8, 1.0);
    c.u2.assign(8, 1.0);
    const Point e = c.endpoint(heis);
    EXPECT_NEAR(e.x1, 1.0, 1e-15);
    EXPECT_NEAR(e.x2, 1.0, 1e-15);
    EXPECT_NEAR(e.x3, 0.5, 1e-15);
    EXPECT_NEAR(c.length(), std::sqrt(2.0), 1e-15);

    const auto r = c.reversed(heis);
    const Point back = r.endpoint(heis);
    EXPECT_NEAR(back.x1, 0.0, 1e-15);
    EXPECT_NEAR(back.x2, 0.0, 1e-15);
    EXPECT_NEAR(back.x3, 0.0, 1e-15);
}

TEST(CcUpperBound, SamePointIsZero) {
    const auto r = cc_upper_bound_curve({0.3, 0.1, 0.2}, {0.3, 0.1, 0.2}, mart, quick());
    EXPECT_EQ(r.length, 0.0);
    EXPECT_EQ(r.mismatch, 0.0);
}

TEST(CcUpperBound, StraightControlsTarget) {
    const double len = cc_upper_bound({0, 0, 0}, {1, 1, 0.5}, heis, 32, 4000, 0);
    EXPECT_LE(len, std::sqrt(2.0) + 1e-3);
    EXPECT_GE(len, std::sqrt(2.0) - 1e-3);
}

TEST(CcUpperBound, HeisenbergPolygonOracle) {
    // shortest closed N-gon enclosing area delta: perimeter sqrt(4 N tan(pi/N) delta)
    for (int n : {8, 16}) {
        const double delta = 0.01;
        const double oracle = std::sqrt(4.0 * n * std::tan(std::numbers::pi / n) * delta);
        const auto r = cc_upper_bound_curve({0, 0, 0}, {0, 0, delta}, heis, quick(n, 8));
        EXPECT_NEAR(r.length, oracle, 1e-4 * oracle) << n;
        EXPECT_LE(r.mismatch, 1e-6);
    }
}

TEST(CcUpperBound, FeasibleEndpoint) {
    const Point p{0.2, -0.1, 0.3};
    const Point q{-0.1, 0.2, 0.25};
    const auto r = cc_upper_bound_curve(p, q, mart, quick());
    EXPECT_LE(euclidean_distance(r.curve.endpoint(mart), q), 1e-6);
    EXPECT_EQ(r.curve.start, p);
    EXPECT_NEAR(r.curve.length(), r.length, 1e-12);
    EXPECT_GE(r.length, euclidean_distance({p.x1, p.x2, 0}, {q.x1, q.x2, 0}));
}

TEST(CcUpperBound, DeterministicForSeed) {
    const Point p{0, 0, 0};
    const Point q{0.1, 0.05, 0.02};
    EXPECT_EQ(cc_upper_bound(p, q, mart, 16, 2000, 7), cc_upper_bound(p, q, mart, 16, 2000, 7));
}

TEST(CcUpperBound, RejectsBadArguments) {
    EXPECT_THROW(cc_upper_bound({0, 0, 0}, {0, 0, 1}, heis, 3, 100, 0), std::invalid_argument);
    EXPECT_THROW(cc_upper_bound({0, 0, 0}, {0, 0, 1}, heis, 16, 0, 0), std::invalid_argument);
}

TEST(CcUpperBound, TinyBudgetRaisesNonConvergence) {
    try {
        cc_upper_bound({0, 0, 0}, {0.3, 0.2, 0.4}, cubic, 8, 1, 0);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_GT(e.residual(), 1e-6);
    }
}

TEST(CcUpperBound, NumericallySymmetric) {
    std::mt19937_64 rng(12);
    for (int pair = 0; pair < 50; ++pair) {
        const auto f = pair % 2 ? heis : mart;
        const auto p = martinet::testing::random_point(rng, 0.3);
        const auto q = martinet::testing::random_point(rng, 0.3);
        const double a = cc_upper_bound_curve(p, q, f, quick(16, 8)).length;
        const double b = cc_upper_bound_curve(q, p, f, quick(16, 8)).length;
        EXPECT_LE(std::abs(a - b), 0.02 * 0.5 * (a + b)) << pair;
    }
}

TEST(CcUpperBound, RefinementDoesNotLengthen) {
    const Point p{0, 0, 0};
    for (const Point& q : {Point{0, 0, 0.01}, Point{0.1, 0.2, 0.05}}) {
        double prev = std::numeric_limits<double>::infinity();
        for (int n : {8, 16, 32}) {
            const double len = cc_upper_bound_curve(p, q, mart, quick(n, 8)).length;
            EXPECT_LE(len, prev + 1e-6);
            prev = len;
        }
    }
}

TEST(CcUpperBound, TriangleInequality) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 6; ++trial) {
        const auto p = martinet::testing::random_point(rng, 0.3);
        const auto q = martinet::testing::random_point(rng, 0.3);
        const auto r = martinet::testing::random_point(rng, 0.3);
        const double pr = cc_upper_bound_curve(p, r, heis, quick()).length;
        const double pq = cc_upper_bound_curve(p, q, heis, quick()).length;
        const double qr = cc_upper_bound_curve(q, r, heis, quick()).length;
        EXPECT_LE(pr, pq + qr + 3e-6);
    }
}

TEST(CcUpperBound, DominatesScaledBallBox) {
    std::mt19937_64 rng(4);
    double ratio_min = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = martinet::testing::random_point(rng, 0.2);
        const auto q = martinet::testing::random_point(rng, 0.2);
        const double cc = cc_upper_bound_curve(p, q, mart, quick()).length;
        EXPECT_GT(cc, 0.0);
        ratio_min = std::min(ratio_min, cc / ball_box_distance(p, q, mart));
    }
    RecordProperty("min_cc_over_ball_box", std::to_string(ratio_min));
    EXPECT_GT(ratio_min, 0.05);
}

TEST(ScalingExponent, ReferenceExamples) {
    const std::vector<double> deltas{1e-3, 1e-2 / 2.0, 1e-2, 5e-2, 1e-1};
    EXPECT_NEAR(scaling_exponent(heis, {0, 0, 0}, 0, deltas).slope, 1.0, 0.02);
    EXPECT_NEAR(scaling_exponent(heis, {0, 0, 0}, 2, deltas).slope, 0.5, 0.05);
    EXPECT_NEAR(scaling_exponent(mart, {0, 0, 0}, 2, deltas).slope, 1.0 / 3.0, 0.05);
}

TEST(ScalingExponent, ValidatesDeltas) {
    EXPECT_THROW(scaling_exponent(heis, {}, 2, std::vector<double>{1e-3, 1e-2, 1e-1}), std::invalid_argument);
    EXPECT_THROW(scaling_exponent(heis, {}, 2, std::vector<double>{1e-2, 2e-2, 5e-2, 1e-1}), std::invalid_argument);
    EXPECT_THROW(scaling_exponent(heis, {}, 3, std::vector<double>{1e-3, 1e-2, 5e-2, 1e-1}), std::invalid_argument);
}

TEST(LogLogSlope, RecoversPowerLaw) {
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
    const std::vector<double> y{3.0, 3.0 * std::pow(2.0, 0.7), 3.0 * std::pow(4.0, 0.7), 3.0 * std::pow(8.0, 0.7)};
    EXPECT_NEAR(loglog_slope(x, y), 0.7, 1e-12);
}
