#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rqgmm/error.hpp"
#include "rqgmm/matrix.hpp"
#include "rqgmm/quantizer.hpp"

using namespace rqgmm;

namespace {

Codebook book(std::vector<std::vector<double>> rows) { return Codebook(oracle::from_rows(rows)); }

}  // namespace

TEST(NearestCode, ClearlyNearerOrigin) {
    const auto nc = nearest_code(ResidualVector{{0.2, 0.1}, 0}, book({{0, 0}, {1, 1}}));
    EXPECT_EQ(nc.index, 0);
    EXPECT_EQ(nc.vector, (std::vector<double>{0, 0}));
}

TEST(NearestCode, TieGoesToLowestIndex) {
    EXPECT_EQ(nearest_code(ResidualVector{{0.5, 0.5}, 0}, book({{0, 0}, {1, 1}})).index, 0);
    EXPECT_EQ(nearest_code(ResidualVector{{0.5, 0.5}, 0}, book({{1, 1}, {0, 0}})).index, 0);
    EXPECT_EQ(nearest_code(ResidualVector{{1.0}, 0}, book({{3}, {0}, {2}})).index, 1);
}

TEST(NearestCode, ReturnsSelectedEntry) {
    const auto cb = book({{4, 4}, {-1, 2}, {0, 9}});
    const auto nc = nearest_code(ResidualVector{{-1.2, 2.5}, 0}, cb);
    ASSERT_EQ(nc.index, 1);
    EXPECT_EQ(nc.vector, (std::vector<double>{-1, 2}));
}

TEST(NearestCode, MatchesExhaustiveScan) {
    std::mt19937_64 g(11);
    const auto codes = oracle::random_rows(g, 16, 8);
    const auto cb = book(codes);
    for (const auto& x : oracle::random_rows(g, 100, 8)) {
        EXPECT_EQ(nearest_code(ResidualVector{x, 0}, cb).index, oracle::nearest_scan(x, codes));
    }
}

TEST(NearestCode, DimensionMismatchIsInputError) {
    EXPECT_THROW(nearest_code(ResidualVector{{1, 2, 3}, 0}, book({{0, 0}})), InputError);
}

TEST(NearestCode, EmptyCodebookIsInputError) {
    EXPECT_THROW(nearest_code(std::vector<double>{1.0}, Matrix(0, 1)), InputError);
}

TEST(ResidualStep, Examples) {
    auto r = residual_step(ResidualVector{{1, 2}, 0}, std::vector<double>{0.5, 0.5});
    EXPECT_EQ(r.values, (std::vector<double>{0.5, 1.5}));
    EXPECT_EQ(r.level, 1);

    r = residual_step(ResidualVector{{3, -1}, 2}, std::vector<double>{3, -1});
    EXPECT_EQ(r.values, (std::vector<double>{0, 0}));
    EXPECT_EQ(r.level, 3);

    r = residual_step(ResidualVector{{0, 0}, 0}, std::vector<double>{0, 0});
    EXPECT_EQ(r.values, (std::vector<double>{0, 0}));
}

TEST(ResidualStep, DimensionMismatchIsInputError) {
    EXPECT_THROW(residual_step(ResidualVector{{1, 2}, 0}, std::vector<double>{1}), InputError);
}

TEST(Matrix, EmbeddingValidation) {
    EXPECT_THROW(EmbeddingMatrix(0, 3, {}), InputError);
    EXPECT_THROW(EmbeddingMatrix(1, 0, {}), InputError);
    EXPECT_THROW(EmbeddingMatrix(1, 2, {1.0, std::nan("")}), InputError);
    EXPECT_THROW(EmbeddingMatrix(1, 2, {1.0, INFINITY}), InputError);
    EXPECT_THROW(EmbeddingMatrix(2, 2, {1.0, 2.0}), InputError);
    EmbeddingMatrix m(2, 1, {1.0, 2.0});
    EXPECT_EQ(m.n(), 2u);
    EXPECT_EQ(m.d(), 1u);
}

TEST(Matrix, CodebookValidation) {
    EXPECT_THROW(Codebook(Matrix(0, 2)), InputError);
    EXPECT_THROW(Codebook(Matrix(1, 1, std::vector<double>{NAN})), InputError);
    EXPECT_FALSE(book({{0, 1}, {1, 0}}).has_duplicate_entries());
    EXPECT_TRUE(book({{0, 1}, {2, 2}, {0, 1}}).has_duplicate_entries());
}
