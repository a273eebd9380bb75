#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "hqamris/detector.hpp"
#include "oracles.hpp"

using namespace hqamris;

namespace {

std::vector<int> sorted(CandidateList list)
{
    std::vector<int> v(list.begin(), list.end());
    std::sort(v.begin(), v.end());
    return v;
}

std::set<int> quadrant_union(const DetectorIndex& idx)
{
    std::set<int> all;
    for (const auto& q : idx.quadrant)
        all.insert(q.begin(), q.end());
    return all;
}

double max_abs(const Constellation& c, bool imag)
{
    double m = 0.0;
    for (auto s : c.symbols())
        m = std::max(m, std::abs(imag ? s.imag() : s.real()));
    return m;
}

} // namespace

class DetectorOrders : public ::testing::TestWithParam<int> {};

TEST_P(DetectorOrders, ColumnsPartitionSymbols)
{
    const auto c = build_hqam(GetParam());
    const auto idx = build_detector(c);
    std::vector<int> seen;
    for (std::size_t i = 0; i < idx.columns.size(); ++i) {
        for (const auto& e : idx.columns[i]) {
            seen.push_back(e.symbol);
            EXPECT_NEAR(c.symbol(e.symbol).real(), idx.column_x[i], 1e-12);
        }
        for (std::size_t j = 1; j < idx.columns[i].size(); ++j)
            EXPECT_NEAR(idx.columns[i][j].im - idx.columns[i][j - 1].im, idx.col_y_step, 1e-9 * c.min_distance());
    }
    std::sort(seen.begin(), seen.end());
    ASSERT_EQ(static_cast<int>(seen.size()), c.order());
    for (int i = 0; i < c.order(); ++i)
        EXPECT_EQ(seen[static_cast<std::size_t>(i)], i);
    EXPECT_NEAR(idx.col_step, c.min_distance() / 2.0, 1e-15);
    EXPECT_NEAR(idx.col_y_step, std::sqrt(3.0) * c.min_distance(), 1e-9 * c.min_distance());
    EXPECT_DOUBLE_EQ(idx.radius, c.min_distance());
}

TEST_P(DetectorOrders, FallbackArraysHoldUnboundedCells)
{
    const auto c = build_hqam(GetParam());
    const auto idx = build_detector(c);
    const auto in_q = quadrant_union(idx);
    for (int s : in_q) {
        EXPECT_TRUE(c.is_external(s)) << s;
        EXPECT_TRUE(oracle::voronoi_unbounded(c.symbols(), static_cast<std::size_t>(s))) << s;
    }
    // Hull vertices own a cone of directions and must be caught by the rays.
    for (int i = 0; i < c.order(); ++i) {
        std::vector<double> angles;
        for (int j = 0; j < c.order(); ++j)
            if (j != i)
                angles.push_back(std::arg(c.symbol(j) - c.symbol(i)));
        std::sort(angles.begin(), angles.end());
        double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
        for (std::size_t k = 1; k < angles.size(); ++k)
            gap = std::max(gap, angles[k] - angles[k - 1]);
        if (gap > std::numbers::pi + 1e-9)
            EXPECT_TRUE(in_q.count(i)) << "hull vertex " << i << " missing";
    }
    for (const auto& q : idx.quadrant)
        EXPECT_TRUE(std::is_sorted(q.begin(), q.end()));
}

TEST_P(DetectorOrders, CandidateSetMatchesBoxFilter)
{
    const auto c = build_hqam(GetParam());
    const auto idx = build_detector(c);
    const double mx = max_abs(c, false) + idx.radius, my = max_abs(c, true) + idx.radius;
    std::mt19937_64 rng(31 + GetParam());
    std::uniform_real_distribution<double> ux(-mx, mx), uy(-my, my);
    const int n = GetParam() <= 64 ? 1'000'000 : 200'000;
    int mismatches = 0;
    for (int t = 0; t < n; ++t) {
        const cplx r(ux(rng), uy(rng));
        if (sorted(candidate_set(idx, r)) != oracle::box_members(c.symbols(), r, idx.radius))
            ++mismatches;
    }
    EXPECT_EQ(mismatches, 0);
}

TEST_P(DetectorOrders, AgreesWithMldNearConstellation)
{
    const auto c = build_hqam(GetParam());
    const auto idx = build_detector(c);
    const double d = c.min_distance();
    std::mt19937_64 rng(7 * GetParam());
    std::uniform_int_distribution<int> pick(0, c.order() - 1);
    std::uniform_real_distribution<double> radius(0.0, 1.0), angle(0.0, 2.0 * std::numbers::pi);
    int mismatches = 0, max_ops = 0;
    for (int t = 0; t < 200'000; ++t) {
        // Uniform in the d_min disc around a random symbol.
        const cplx r = c.symbol(pick(rng)) + std::polar(d * std::sqrt(radius(rng)), angle(rng));
        DetectStats stats;
        const int got = detect(idx, r, &stats);
        EXPECT_FALSE(stats.fallback);
        max_ops = std::max(max_ops, stats.distance_ops);
        mismatches += got != oracle::nearest(c.symbols(), r);
    }
    EXPECT_EQ(mismatches, 0);
    EXPECT_LE(max_ops, 7);
    RecordProperty("max_distance_ops", max_ops);
}

TEST_P(DetectorOrders, FarFieldUsesQuadrantArrays)
{
    const auto c = build_hqam(GetParam());
    const auto idx = build_detector(c);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (int t = 0; t < 20'000; ++t) {
        const cplx r = std::polar(1e4 * c.min_distance(), angle(rng));
        DetectStats stats;
        EXPECT_EQ(detect(idx, r, &stats), oracle::nearest(c.symbols(), r));
        EXPECT_TRUE(stats.fallback);
        EXPECT_EQ(stats.candidates, 0);
    }
}

INSTANTIATE_TEST_SUITE_P(Orders, DetectorOrders, ::testing::Values(16, 64, 256, 1024));

TEST(Detector, ExactSymbolSeesSevenCandidates)
{
    const auto c = build_hqam(64);
    const auto idx = build_detector(c);
    int interior = -1;
    for (int i = 0; i < 64 && interior < 0; ++i)
        if (!c.is_external(i))
            interior = i;
    ASSERT_GE(interior, 0);
    const cplx r = c.symbol(interior);
    const auto got = sorted(candidate_set(idx, r));
    EXPECT_EQ(got.size(), 7u);
    EXPECT_EQ(got, oracle::box_members(c.symbols(), r, idx.radius * (1.0 + 1e-9)));
    EXPECT_EQ(detect(idx, r), interior);
    for (int s : got)
        if (s != interior)
            EXPECT_NEAR(std::abs(c.symbol(s) - r), c.min_distance(), 1e-9);
}

// Midway between two same-column symbols, with the box edges landing exactly
// on the columns at x +- d_min: five columns contribute 2+1+2+1+2 symbols.
// The point set has measure zero; random inputs see at most 6.
TEST(Detector, ColumnLineMidpointSeesEight)
{
    const auto c = build_hqam(64);
    const auto idx = build_detector(c);
    const double d = c.min_distance();
    bool found = false;
    for (int i = 0; i < 64 && !found; ++i) {
        const cplx r = c.symbol(i) + cplx(0.0, idx.col_y_step / 2.0);
        if (oracle::box_members(c.symbols(), r, d * (1.0 + 1e-9)).size() != 8)
            continue;
        found = true;
        DetectStats stats;
        const int got = detect(idx, r, &stats);
        EXPECT_EQ(stats.candidates, 8);
        EXPECT_EQ(stats.distance_ops, 8);
        EXPECT_EQ(got, mld_detect(c, r));
    }
    EXPECT_TRUE(found);
}

TEST(Detector, EmptyBoxFarOutside)
{
    const auto c = build_hqam(64);
    const auto idx = build_detector(c);
    double rmax = 0.0;
    for (auto s : c.symbols())
        rmax = std::max(rmax, std::abs(s));
    const cplx r = std::polar(rmax + 2.0 * c.min_distance(), std::numbers::pi / 4.0);
    EXPECT_TRUE(candidate_set(idx, r).empty());
}

TEST(Detector, DiagonalFarPointUsesFirstQuadrant)
{
    const auto c = build_hqam(64);
    const auto idx = build_detector(c);
    const cplx r = std::polar(1e3 * c.min_distance(), std::numbers::pi / 4.0);
    const auto& q1 = idx.quadrant[0];
    const int best_q1 = *std::min_element(q1.begin(), q1.end(), [&](int a, int b) {
        return std::norm(r - c.symbol(a)) < std::norm(r - c.symbol(b));
    });
    EXPECT_EQ(detect(idx, r), best_q1);
    EXPECT_EQ(detect(idx, r), mld_detect(c, r));
}

TEST(Detector, FourPointSetQuadrants)
{
    const auto c = build_hqam(4);
    const auto idx = build_detector(c);
    EXPECT_EQ(quadrant_union(idx), (std::set<int>{0, 1, 2, 3}));
}

TEST(Detector, RejectsSquareQam)
{
    EXPECT_THROW(build_detector(build_qam(64)), std::invalid_argument);
}

TEST(Detector, QuadrantConvention)
{
    EXPECT_EQ(quadrant_of({1, 1}), 0);
    EXPECT_EQ(quadrant_of({0, 0}), 0);
    EXPECT_EQ(quadrant_of({-1, 1}), 1);
    EXPECT_EQ(quadrant_of({-1, -1}), 2);
    EXPECT_EQ(quadrant_of({1, -1}), 3);
}

TEST(Mld, SymbolAndMidpointTies)
{
    const auto c = build_hqam(64);
    for (int i = 0; i < 64; ++i)
        EXPECT_EQ(mld_detect(c, c.symbol(i)), i);
    const double d = c.min_distance();
    int checked = 0;
    for (int i = 0; i < 64; ++i)
        for (int j = i + 1; j < 64; ++j)
            if (std::abs(std::abs(c.symbol(i) - c.symbol(j)) - d) < 1e-9) {
                const cplx mid = (c.symbol(i) + c.symbol(j)) / 2.0;
                // Only a true two-way tie exercises the rule.
                if (std::abs(std::abs(c.symbol(oracle::nearest(c.symbols(), mid)) - mid) - d / 2.0) > 1e-12)
                    continue;
                const int got = mld_detect(c, mid);
                if (std::norm(mid - c.symbol(i)) == std::norm(mid - c.symbol(j))) {
                    EXPECT_EQ(got, i);
                    ++checked;
                }
            }
    EXPECT_GT(checked, 0);
}

TEST(Mld, MatchesIndependentSearch)
{
    for (int m : {16, 256}) {
        const auto c = build_hqam(m);
        std::mt19937_64 rng(m);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int t = 0; t < 100'000; ++t) {
            const cplx r(g(rng), g(rng));
            EXPECT_EQ(mld_detect(c, r), oracle::nearest(c.symbols(), r));
        }
    }
}

TEST(QamSlicer, MatchesMld)
{
    for (int m : {4, 16, 64, 256, 1024}) {
        const auto c = build_qam(m);
        std::mt19937_64 rng(m);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int t = 0; t < 50'000; ++t) {
            const cplx r(g(rng), g(rng));
            EXPECT_EQ(qam_slice(c, r), oracle::nearest(c.symbols(), r));
        }
        for (int i = 0; i < m; ++i)
            EXPECT_EQ(qam_slice(c, c.symbol(i)), i);
    }
    EXPECT_THROW(qam_slice(build_hqam(64), {0, 0}), std::invalid_argument);
}
