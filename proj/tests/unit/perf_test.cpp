// Timing checks. Ratios of minimum wall times, so they tolerate a noisy host.
#include <gtest/gtest.h>

#include <chrono>

#include "rqgmm/kmeans.hpp"
#include "rqgmm/rng.hpp"

using namespace rqgmm;

namespace {

Matrix gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

// Best-of-5 seconds per Lloyd iteration.
double seconds_per_iteration(const Matrix& data, int k) {
    double best = 1e300;
    for (int rep = 0; rep < 5; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto lvl = kmeans_fit(data, k, FitConfig{.max_iters = 8, .tol = 1e-300});
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, s / lvl.iterations);
    }
    return best;
}

}  // namespace

TEST(Perf, KmeansLinearInN) {
    const double a = seconds_per_iteration(gaussian_rows(20000, 16, 1), 32);
    const double b = seconds_per_iteration(gaussian_rows(40000, 16, 2), 32);
    EXPECT_LE(b / a, 2.3) << "ratio " << b / a;
}

TEST(Perf, KmeansLinearInK) {
    const auto data = gaussian_rows(20000, 16, 3);
    const double a = seconds_per_iteration(data, 32);
    const double b = seconds_per_iteration(data, 64);
    EXPECT_LE(b / a, 2.3) << "ratio " << b / a;
}
