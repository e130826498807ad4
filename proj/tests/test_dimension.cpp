#include <gtest/gtest.h>

#include "mixsem/dimension.hpp"
#include "mixsem/search.hpp"
#include "oracles.hpp"

using namespace mixsem;

namespace {

MixedGraph three_cycle() { return MixedGraph(3, {{1, 2}, {2, 3}, {3, 1}}, {}); }

bool has_bow_or_two_cycle(const MixedGraph& g) {
    for (auto [i, j] : vertex_pairs(g.p())) {
        const int m = g.pair_mask(i, j);
        if (m != 0 && m != 1 && m != 2 && m != 4) return true;
    }
    return false;
}

}  // namespace

TEST(GMap, Examples) {
    Matrix sigma(2, 2);
    sigma << 2, 0.3, 0.3, 1;
    EXPECT_EQ(g_map(Matrix::Zero(2, 2), sigma), sigma);
    const double a = 0.4;
    Matrix l = Matrix::Zero(2, 2);
    l(0, 1) = a;
    Matrix want(2, 2);
    want << 1, -a, -a, 1 + a * a;
    EXPECT_TRUE(approx_equal(g_map(l, Matrix::Identity(2, 2)), want));
}

TEST(ReducedJacobian, AtOriginHasUnitStructure) {
    MixedGraph g(4, {{1, 2}, {3, 2}, {4, 1}}, {{3, 4}});
    auto jac = reduced_jacobian(g, Matrix::Zero(4, 4), Matrix::Identity(4, 4));
    EXPECT_EQ(jac.rows.size(), 6u - 1u);
    EXPECT_EQ(jac.cols.size(), 3u);
    for (std::size_t c = 0; c < jac.cols.size(); ++c) {
        auto [k, l] = jac.cols[c];
        for (std::size_t r = 0; r < jac.rows.size(); ++r) {
            const bool on_edge = jac.rows[r] == Pair{std::min(k, l), std::max(k, l)};
            EXPECT_EQ(jac.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), on_edge ? -1.0 : 0.0);
        }
    }
    auto empty = reduced_jacobian(MixedGraph(3), Matrix::Zero(3, 3), Matrix::Identity(3, 3));
    EXPECT_EQ(empty.values.cols(), 0);
    EXPECT_EQ(empty.values.rows(), 3);
}

TEST(ReducedJacobian, MatchesFiniteDifferences) {
    Rng rng = substream(31);
    const double h = 1e-5;
    for (int rep = 0; rep < 60; ++rep) {
        auto g = random_simple_graph(3 + rep % 3, rng);
        Params P = detail::random_regular_point(g, rng);
        Matrix sigma = phi(g, P);
        auto jac = reduced_jacobian(g, P.lambda, sigma);
        for (std::size_t c = 0; c < jac.cols.size(); ++c) {
            auto [k, l] = jac.cols[c];
            Matrix up = P.lambda, down = P.lambda;
            up(k - 1, l - 1) += h;
            down(k - 1, l - 1) -= h;
            Matrix fd = (g_map(up, sigma) - g_map(down, sigma)) / (2 * h);
            for (std::size_t r = 0; r < jac.rows.size(); ++r) {
                auto [i, j] = jac.rows[r];
                EXPECT_NEAR(jac.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), fd(i - 1, j - 1),
                            1e-6);
            }
        }
    }
}

TEST(NumericRank, Examples) {
    EXPECT_EQ(numeric_rank(Matrix::Identity(5, 5)), 5);
    EXPECT_EQ(numeric_rank(Matrix::Zero(4, 3)), 0);
    Vector u = Vector::LinSpaced(4, 1, 4), v = Vector::LinSpaced(3, -1, 2);
    EXPECT_EQ(numeric_rank(u * v.transpose()), 1);
    RankPolicy loose{0.5};
    Matrix d = Eigen::Vector3d(1, 0.1, 2).asDiagonal();
    EXPECT_EQ(numeric_rank(d, loose), 2);
}

TEST(ExpectedDimension, Examples) {
    EXPECT_EQ(expected_dimension(three_cycle()), 6u);
    EXPECT_EQ(expected_dimension(MixedGraph(5)), 5u);
    EXPECT_EQ(expected_dimension(MixedGraph(4, {{1, 2}}, {{3, 4}})), 6u);
    EXPECT_THROW(expected_dimension(MixedGraph(2, {{1, 2}}, {{1, 2}})), ContractError);
}

TEST(ModelDimension, Examples) {
    EXPECT_EQ(model_dimension(three_cycle(), 5, 1), 6u);
    EXPECT_EQ(model_dimension(MixedGraph(4), 5, 1), 4u);
    EXPECT_EQ(model_dimension(MixedGraph(2, {{1, 2}}, {{1, 2}}), 5, 1), 3u);
    EXPECT_THROW(model_dimension(three_cycle(), 0, 1), ContractError);
}

TEST(ModelDimension, SimpleGraphsAreFullDimensional) {
    Rng rng = substream(32);
    for (int rep = 0; rep < 150; ++rep) {
        auto g = random_simple_graph(3 + rep % 3, rng);
        EXPECT_EQ(model_dimension(g, 5, static_cast<std::uint64_t>(rep)), expected_dimension(g)) << g.to_string();
    }
}

TEST(ModelDimension, CollapsedColumnsLoseRankAtOrigin) {
    // At (0, I) a bow gives a zero column and a 2-cycle two equal columns.
    for (const auto& g : oracle::all_mixed_graphs(3)) {
        if (!has_bow_or_two_cycle(g)) continue;
        auto jac = reduced_jacobian(g, Matrix::Zero(3, 3), Matrix::Identity(3, 3));
        EXPECT_LT(numeric_rank(jac.values), static_cast<int>(g.directed().size())) << g.to_string();
    }
}

TEST(ModelDimension, NondecreasingInTrials) {
    MixedGraph g(3, {{1, 2}, {2, 1}, {2, 3}}, {{1, 3}});
    std::size_t prev = 0;
    for (int t = 1; t <= 6; ++t) {
        const std::size_t d = model_dimension(g, t, 9);
        EXPECT_GE(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, parameter_count(g));
}
