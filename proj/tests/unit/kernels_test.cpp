#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rqgmm/error.hpp"
#include "rqgmm/kernels.hpp"
#include "rqgmm/parallel.hpp"

using namespace rqgmm;
namespace kn = rqgmm::kernels;

namespace {

struct Problem {
    Matrix points, codes, variances;
    std::vector<double> weights;
};

Problem make_problem(std::uint64_t seed, std::size_t n, std::size_t k, std::size_t d) {
    std::mt19937_64 g(seed);
    Problem p;
    p.points = oracle::from_rows(oracle::random_rows(g, n, d, -3, 3));
    p.codes = oracle::from_rows(oracle::random_rows(g, k, d, -3, 3));
    p.variances = oracle::from_rows(oracle::random_rows(g, k, d, 0.2, 2.0));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += p.weights.emplace_back(u(g));
    for (auto& w : p.weights) w /= s;
    return p;
}

class ThreadGuard {
public:
    explicit ThreadGuard(int n) : saved_(threads()) { set_threads(n); }
    ~ThreadGuard() { set_threads(saved_); }

private:
    int saved_;
};

}  // namespace

TEST(Kernels, AssignNearestMatchesSerialAndOracle) {
    const auto p = make_problem(1, 503, 9, 5);
    std::vector<int> la(503), lb(503);
    std::vector<double> da(503), db(503);
    const double sa = kn::assign_nearest(p.points, p.codes, la, da);
    const double sb = kn::serial::assign_nearest(p.points, p.codes, lb, db);
    EXPECT_EQ(la, lb);
    EXPECT_EQ(da, db);
    EXPECT_EQ(sa, sb);
    const auto rows = oracle::to_rows(p.points), codes = oracle::to_rows(p.codes);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(la[i], oracle::nearest_scan(rows[i], codes));
}

TEST(Kernels, ClusterSumsMatchesSerial) {
    const auto p = make_problem(2, 400, 7, 3);
    std::vector<int> labels(400);
    std::vector<double> d2(400);
    kn::serial::assign_nearest(p.points, p.codes, labels, d2);
    Matrix sa(7, 3), sb(7, 3);
    std::vector<std::int64_t> ca(7), cb(7);
    kn::cluster_sums(p.points, labels, sa, ca);
    kn::serial::cluster_sums(p.points, labels, sb, cb);
    EXPECT_EQ(sa, sb);
    EXPECT_EQ(ca, cb);
    std::int64_t total = 0;
    for (auto c : ca) total += c;
    EXPECT_EQ(total, 400);
}

TEST(Kernels, EStepMatchesSerial) {
    const auto p = make_problem(3, 300, 6, 4);
    const auto terms = kn::make_gmm_terms(p.codes, p.variances, p.weights);
    Matrix ra(300, 6), rb(300, 6);
    std::vector<double> lla(300), llb(300);
    std::vector<int> la(300), lb(300);
    const double ta = kn::e_step(p.points, p.codes, terms, ra, lla, la);
    const double tb = kn::serial::e_step(p.points, p.codes, terms, rb, llb, lb);
    EXPECT_EQ(ra, rb);
    EXPECT_EQ(lla, llb);
    EXPECT_EQ(la, lb);
    EXPECT_EQ(ta, tb);

    Matrix ma = p.codes, mb = p.codes;
    std::vector<double> na(6), nb(6);
    kn::weighted_means(p.points, ra, na, ma);
    kn::serial::weighted_means(p.points, rb, nb, mb);
    EXPECT_EQ(ma, mb);
    EXPECT_EQ(na, nb);

    Matrix va(6, 4), vb(6, 4);
    kn::weighted_variances(p.points, ra, na, ma, va);
    kn::serial::weighted_variances(p.points, rb, nb, mb, vb);
    EXPECT_EQ(va, vb);

    EXPECT_EQ(kn::labeled_sse(p.points, p.codes, la), kn::serial::labeled_sse(p.points, p.codes, lb));
}

TEST(Kernels, UpdateMinDist2MatchesSerial) {
    const auto p = make_problem(4, 200, 3, 2);
    std::vector<double> a(200, INFINITY), b(200, INFINITY);
    for (std::size_t c = 0; c < 3; ++c) {
        kn::update_min_dist2(p.points, p.codes.row(c), a);
        kn::serial::update_min_dist2(p.points, p.codes.row(c), b);
    }
    EXPECT_EQ(a, b);
}

TEST(Kernels, ResultsIndependentOfThreadCount) {
    const auto p = make_problem(5, 1001, 8, 6);
    const auto terms = kn::make_gmm_terms(p.codes, p.variances, p.weights);
    auto run = [&](int t) {
        ThreadGuard guard(t);
        Matrix resp(1001, 8);
        std::vector<double> ll(1001);
        std::vector<int> labels(1001);
        const double total = kn::e_step(p.points, p.codes, terms, resp, ll, labels);
        Matrix means = p.codes;
        std::vector<double> nk(8);
        kn::weighted_means(p.points, resp, nk, means);
        return std::make_tuple(total, resp, means, nk);
    };
    EXPECT_EQ(run(1), run(4));
    EXPECT_EQ(run(1), run(3));
}

TEST(Kernels, WeightedMeansKeepsMeanOfEmptyComponent) {
    Matrix points(2, 1, std::vector<double>{1.0, 3.0});
    Matrix resp(2, 2, std::vector<double>{1.0, 0.0, 1.0, 0.0});
    Matrix means(2, 1, std::vector<double>{0.0, 7.0});
    std::vector<double> nk(2);
    kn::weighted_means(points, resp, nk, means);
    EXPECT_DOUBLE_EQ(means(0, 0), 2.0);
    EXPECT_EQ(means(1, 0), 7.0);
    EXPECT_EQ(nk[1], 0.0);
}

TEST(Kernels, ZeroWeightGetsMinusInfinity) {
    Matrix means(2, 1, std::vector<double>{0.0, 1.0});
    Matrix vars(2, 1, 1.0);
    std::vector<double> w{1.0, 0.0};
    const auto terms = kn::make_gmm_terms(means, vars, w);
    EXPECT_TRUE(std::isinf(terms.log_norm[1]) && terms.log_norm[1] < 0);
    const std::vector<double> x{1.0};
    EXPECT_TRUE(std::isinf(kn::log_joint(x, means, terms, 1)));
}

TEST(Kernels, EStepThrowsWhenEveryComponentImpossible) {
    Matrix points(1, 1, 0.0);
    Matrix means(1, 1, 0.0);
    Matrix vars(1, 1, 1.0);
    std::vector<double> w{0.0};
    const auto terms = kn::make_gmm_terms(means, vars, w);
    Matrix resp(1, 1);
    std::vector<double> ll(1);
    std::vector<int> labels(1);
    EXPECT_THROW(kn::e_step(points, means, terms, resp, ll, labels), InternalError);
    EXPECT_THROW(kn::serial::e_step(points, means, terms, resp, ll, labels), InternalError);
}
