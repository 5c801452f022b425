#include <random>

#include <gtest/gtest.h>

#include "heatreach/geometry.hpp"

using namespace heatreach;

TEST(Distance, IntervalInteriorAndBoundary)
{
    const DomainSpec dom = Interval{-1.0, 1.0};
    EXPECT_DOUBLE_EQ(distance_to_boundary(dom, RealVector{0.3}).distance, 0.7);
    const auto on = distance_to_boundary(dom, RealVector{1.0});
    EXPECT_EQ(on.distance, 0.0);
    EXPECT_FALSE(on.exterior);
    const auto out = distance_to_boundary(dom, RealVector{1.5});
    EXPECT_DOUBLE_EQ(out.distance, 0.5);
    EXPECT_TRUE(out.exterior);
}

TEST(Distance, Ball)
{
    const DomainSpec dom = Ball{{0.0, 0.0}, 2.0, 2};
    EXPECT_DOUBLE_EQ(distance_to_boundary(dom, RealVector{1.0, 0.0}).distance, 1.0);
    EXPECT_THROW(distance_to_boundary(dom, RealVector{1.0}), std::invalid_argument);
}

TEST(Distance, PolygonSquare)
{
    const DomainSpec dom = Polygon{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
    EXPECT_DOUBLE_EQ(distance_to_boundary(dom, RealVector{0.5, 1.0}).distance, 0.5);
    const auto out = distance_to_boundary(dom, RealVector{3.0, 1.0});
    EXPECT_TRUE(out.exterior);
    EXPECT_DOUBLE_EQ(out.distance, 1.0);
    EXPECT_NEAR(inradius(dom), 1.0, 1e-6);
}

TEST(Validate, RejectsBadDomains)
{
    EXPECT_THROW(validate(Interval{1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(validate(Ball{{0.0}, -1.0, 1}), std::invalid_argument);
    EXPECT_THROW(validate(Ball{{0.0, 0.0}, 1.0, 1}), std::invalid_argument);
    // clockwise
    EXPECT_THROW(validate(Polygon{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}), std::invalid_argument);
    // bow tie
    EXPECT_THROW(validate(Polygon{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}), std::invalid_argument);
    EXPECT_THROW(validate(Polygon{{{0, 0}, {1, 0}}}), std::invalid_argument);
}

TEST(Egg, OpenAndClosedModes)
{
    const DomainSpec dom = Interval{-1.0, 1.0};
    EXPECT_TRUE(egg_contains(dom, ComplexPoint::scalar({0.5, 0.4}), EggMode::open));
    EXPECT_FALSE(egg_contains(dom, ComplexPoint::scalar({0.5, 0.5}), EggMode::open));
    EXPECT_TRUE(egg_contains(dom, ComplexPoint::scalar({0.5, 0.5}), EggMode::closed));
    EXPECT_TRUE(egg_contains(dom, ComplexPoint::scalar({1.0, 0.0}), EggMode::closed));
    EXPECT_FALSE(egg_contains(dom, ComplexPoint::scalar({1.0, 0.0}), EggMode::open));

    const DomainSpec disk = Ball{{0.0, 0.0}, 1.0, 2};
    EXPECT_TRUE(egg_contains(disk, ComplexPoint{{0.3, 0.0}, {0.0, 0.6}}, EggMode::open));
}

class RandomDomains : public ::testing::TestWithParam<int> {};

TEST_P(RandomDomains, OpenImpliesClosed)
{
    const std::vector<DomainSpec> doms = {Interval{-1.0, 2.0}, Ball{{0.2, -0.1}, 1.3, 2},
                                          Polygon{{{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {0, 2}}}};
    const DomainSpec& dom = doms[static_cast<std::size_t>(GetParam())];
    const int d = dimension(dom);
    std::mt19937_64 rng(17 + GetParam());
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    int open_count = 0;
    for (int k = 0; k < 1000; ++k) {
        RealVector x(d), y(d);
        for (int j = 0; j < d; ++j) {
            x[j] = U(rng);
            y[j] = 0.3 * U(rng);
        }
        const ComplexPoint z{x, y};
        if (egg_contains(dom, z, EggMode::open)) {
            ++open_count;
            EXPECT_TRUE(egg_contains(dom, z, EggMode::closed));
        }
    }
    EXPECT_GT(open_count, 0);
}

TEST_P(RandomDomains, DistanceIsOneLipschitz)
{
    const std::vector<DomainSpec> doms = {Interval{-1.0, 2.0}, Ball{{0.2, -0.1}, 1.3, 2},
                                          Polygon{{{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {0, 2}}}};
    const DomainSpec& dom = doms[static_cast<std::size_t>(GetParam())];
    const int d = dimension(dom);
    std::mt19937_64 rng(99 + GetParam());
    std::uniform_real_distribution<double> U(-2.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        RealVector a(d), b(d);
        for (int j = 0; j < d; ++j) {
            a[j] = U(rng);
            b[j] = a[j] + 0.2 * (U(rng) - 0.5);
        }
        const double da = distance_to_boundary(dom, a).distance;
        const double db = distance_to_boundary(dom, b).distance;
        double sep = 0.0;
        for (int j = 0; j < d; ++j) sep += (a[j] - b[j]) * (a[j] - b[j]);
        EXPECT_LE(std::abs(da - db), std::sqrt(sep) + 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(Domains, RandomDomains, ::testing::Values(0, 1, 2));

TEST(Egg, BallMatchesL1Characterization)
{
    const double R = 1.0;
    const DomainSpec disk = Ball{{0.0, 0.0}, R, 2};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const ComplexPoint z{{U(rng), U(rng)}, {U(rng), U(rng)}};
        const bool expected = z.real_norm() + z.imag_norm() < R;
        EXPECT_EQ(egg_contains(disk, z, EggMode::open), expected);
    }
}

TEST(Sampling, IntervalGrid)
{
    const DomainSpec dom = Interval{-1.0, 1.0};
    const auto pts = sample_compact_subset(dom, 0.1, {5, 5, 8});
    EXPECT_EQ(pts.size(), 25u);
    for (const auto& z : pts) {
        EXPECT_TRUE(egg_contains(dom, z, EggMode::closed));
        EXPECT_LE(z.imag_norm(), distance_to_boundary(dom, z.re).distance - 0.1 + 1e-15);
    }
    const auto tight = sample_compact_subset(dom, 0.999, {5, 5, 8});
    ASSERT_FALSE(tight.empty());
    for (const auto& z : tight) EXPECT_LE(std::abs(z.re[0]), 0.0011);
}

TEST(Sampling, DiskAndPolygonRespectMargin)
{
    const std::vector<DomainSpec> doms = {Ball{{0.0, 0.0}, 1.0, 2}, Polygon{{{0, 0}, {2, 0}, {2, 1}, {0, 1}}}};
    for (const auto& dom : doms) {
        const auto pts = sample_compact_subset(dom, 0.05, {9, 4, 6});
        ASSERT_FALSE(pts.empty());
        for (const auto& z : pts) {
            EXPECT_TRUE(egg_contains(dom, z, EggMode::closed));
            EXPECT_LE(z.imag_norm(), distance_to_boundary(dom, z.re).distance - 0.05 + 1e-12);
        }
        // deterministic
        const auto again = sample_compact_subset(dom, 0.05, {9, 4, 6});
        ASSERT_EQ(again.size(), pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) {
            EXPECT_EQ(again[k].re, pts[k].re);
            EXPECT_EQ(again[k].im, pts[k].im);
        }
    }
}

TEST(Sampling, MarginTooLarge)
{
    EXPECT_THROW(sample_compact_subset(Ball{{0.0, 0.0}, 1.0, 2}, 1.1, {}), std::invalid_argument);
    EXPECT_THROW(sample_compact_subset(Interval{-1.0, 1.0}, 0.0, {}), std::invalid_argument);
}
