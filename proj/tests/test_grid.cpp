#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "martinet/grid.hpp"

using namespace martinet;

TEST(BoxDomain, Validates) {
    EXPECT_THROW(BoxDomain({0, 0, 0}, {1, 0, 1}), std::invalid_argument);
    EXPECT_THROW(BoxDomain({0, 0, 0}, {1, std::nan(""), 1}), std::invalid_argument);
    EXPECT_NO_THROW(BoxDomain::cube(-1.0, 1.0));
}

TEST(GridFunction, LatticeGeometry) {
    GridFunction u(BoxDomain({-1, 0, 2}, {1, 1, 3}), {5, 3, 9});
    EXPECT_EQ(u.size(), 5u * 3u * 9u);
    EXPECT_DOUBLE_EQ(u.spacing(0), 0.5);
    EXPECT_DOUBLE_EQ(u.spacing(2), 0.125);
    EXPECT_DOUBLE_EQ(u.max_spacing(), 0.5);
    EXPECT_EQ(u.node({4, 2, 8}), (Point{1, 1, 3}));
    EXPECT_EQ(u.node({2, 1, 4}), (Point{0, 0.5, 2.5}));
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(u.index(u.unravel(i)), i);
    EXPECT_EQ(u.index({0, 0, 1}), 1u);
    EXPECT_TRUE(u.is_boundary({0, 1, 4}));
    EXPECT_TRUE(u.is_boundary({2, 1, 8}));
    EXPECT_FALSE(u.is_boundary({2, 1, 4}));
    EXPECT_THROW(GridFunction(BoxDomain::cube(0, 1), {2, 3, 3}), std::invalid_argument);
}

TEST(GridFunction, BoundaryFillLeavesInterior) {
    GridFunction u(BoxDomain::cube(0, 1), 4);
    u.fill_boundary([](const Point& p) { return p.x1 + 2.0 * p.x2; });
    EXPECT_EQ(u.at({1, 1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(u.at({3, 1, 2}), 1.0 + 2.0 / 3.0);
    EXPECT_THROW(u.fill_boundary({}), std::invalid_argument);
}

TEST(GridFunction, TrilinearIsExactOnMultilinearData) {
    GridFunction u(BoxDomain({-1, -2, 0}, {1, 2, 1}), {7, 5, 4});
    auto g = [](const Point& p) { return 1.0 + 2.0 * p.x1 - p.x2 + 0.5 * p.x3 + 0.3 * p.x1 * p.x2 * p.x3; };
    u.fill(g);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> a(-1, 1), b(-2, 2), c(0, 1);
    for (int k = 0; k < 200; ++k) {
        const Point p{a(rng), b(rng), c(rng)};
        EXPECT_NEAR(u.interpolate(p), g(p), 1e-13);
    }
    EXPECT_NEAR(u.interpolate({1, 2, 1}), g({1, 2, 1}), 1e-13);
    EXPECT_THROW(u.interpolate({1.01, 0, 0.5}), OutOfHull);
    EXPECT_THROW(u.interpolate({0, 0, -0.1}), OutOfHull);
}

TEST(GridCsv, RoundTripIsExact) {
    GridFunction u(BoxDomain({-1, 0.1, 2}, {0.7, 1.3, 2.9}), {4, 5, 3});
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    for (auto& v : u.values()) v = n(rng);
    std::stringstream ss;
    write_grid_csv(ss, u);
    const auto back = read_grid_csv(ss);
    EXPECT_EQ(back, u);
    EXPECT_EQ(back.counts(), u.counts());
}

TEST(GridCsv, FormatHasHeaderAndFullPrecision) {
    GridFunction u(BoxDomain::cube(0, 1), 3);
    u.values()[0] = 0.1;
    std::stringstream ss;
    write_grid_csv(ss, u);
    std::string header, first;
    std::getline(ss, header);
    std::getline(ss, first);
    EXPECT_EQ(header, "x1,x2,x3,value");
    EXPECT_EQ(first, "0,0,0,0.10000000000000001");
}

TEST(GridCsv, RejectsMalformedInput) {
    std::stringstream no_header("1,2,3,4\n");
    EXPECT_THROW(read_grid_csv(no_header), std::invalid_argument);
    std::stringstream short_row("x1,x2,x3,value\n0,0,0\n");
    EXPECT_THROW(read_grid_csv(short_row), std::invalid_argument);
    std::stringstream partial("x1,x2,x3,value\n0,0,0,1\n1,1,1,1\n");
    EXPECT_THROW(read_grid_csv(partial), std::invalid_argument);
}

TEST(FormatDouble, SeventeenDigits) {
    EXPECT_EQ(format_double(1.0 / 3.0), "0.33333333333333331");
    EXPECT_EQ(format_double(-2.0), "-2");
}
