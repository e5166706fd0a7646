// OpenMP kernels against their serial references, plus encode scaling.
//
//   ./bench_kernels --benchmark_filter=EStep
// The argument of the parallel cases is the OpenMP thread count.
#include <benchmark/benchmark.h>

#include <vector>

#include "rqgmm/kernels.hpp"
#include "rqgmm/parallel.hpp"
#include "rqgmm/pipeline.hpp"
#include "rqgmm/rng.hpp"

using namespace rqgmm;
namespace kn = rqgmm::kernels;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

struct Fixture {
    Matrix points, means, variances;
    std::vector<double> weights;
    kn::GmmTerms terms;
    Matrix resp;
    std::vector<double> row_ll, dist2, nk;
    std::vector<int> labels;

    Fixture(std::size_t n, std::size_t k, std::size_t d)
        : points(gaussian(n, d, 1)), means(gaussian(k, d, 2)), variances(k, d, 1.0),
          weights(k, 1.0 / static_cast<double>(k)), resp(n, k), row_ll(n), dist2(n), nk(k),
          labels(n) {
        terms = kn::make_gmm_terms(means, variances, weights);
        kn::serial::e_step(points, means, terms, resp, row_ll, labels);
    }
};

constexpr std::size_t kN = 20000, kK = 64, kD = 32;

template <bool Parallel>
void BM_AssignNearest(benchmark::State& state) {
    if (Parallel) set_threads(static_cast<int>(state.range(0)));
    Fixture f(kN, kK, kD);
    for (auto _ : state) {
        const double j = Parallel ? kn::assign_nearest(f.points, f.means, f.labels, f.dist2)
                                  : kn::serial::assign_nearest(f.points, f.means, f.labels, f.dist2);
        benchmark::DoNotOptimize(j);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kN));
}

template <bool Parallel>
void BM_EStep(benchmark::State& state) {
    if (Parallel) set_threads(static_cast<int>(state.range(0)));
    Fixture f(kN, kK, kD);
    for (auto _ : state) {
        const double ll = Parallel
                              ? kn::e_step(f.points, f.means, f.terms, f.resp, f.row_ll, f.labels)
                              : kn::serial::e_step(f.points, f.means, f.terms, f.resp, f.row_ll, f.labels);
        benchmark::DoNotOptimize(ll);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kN));
}

template <bool Parallel>
void BM_MStep(benchmark::State& state) {
    if (Parallel) set_threads(static_cast<int>(state.range(0)));
    Fixture f(kN, kK, kD);
    Matrix means = f.means, vars(kK, kD);
    for (auto _ : state) {
        if (Parallel) {
            kn::weighted_means(f.points, f.resp, f.nk, means);
            kn::weighted_variances(f.points, f.resp, f.nk, means, vars);
        } else {
            kn::serial::weighted_means(f.points, f.resp, f.nk, means);
            kn::serial::weighted_variances(f.points, f.resp, f.nk, means, vars);
        }
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kN));
}

template <bool Parallel>
void BM_ClusterSums(benchmark::State& state) {
    if (Parallel) set_threads(static_cast<int>(state.range(0)));
    Fixture f(kN, kK, kD);
    kn::serial::assign_nearest(f.points, f.means, f.labels, f.dist2);
    Matrix sums(kK, kD);
    std::vector<std::int64_t> counts(kK);
    for (auto _ : state) {
        if (Parallel) {
            kn::cluster_sums(f.points, f.labels, sums, counts);
        } else {
            kn::serial::cluster_sums(f.points, f.labels, sums, counts);
        }
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kN));
}

// Per-sample encode cost against (L, K, D); expected to grow linearly in each.
void BM_EncodeScaling(benchmark::State& state) {
    const auto L = static_cast<std::size_t>(state.range(0));
    const auto K = static_cast<std::size_t>(state.range(1));
    const auto D = static_cast<std::size_t>(state.range(2));
    std::vector<Level> levels;
    for (std::size_t l = 0; l < L; ++l) {
        KmeansLevel km;
        km.centroids = Codebook(gaussian(K, D, 10 + l));
        levels.emplace_back(std::move(km));
    }
    const RqModel model(Method::kRqKmeans, std::move(levels));
    const Matrix x = gaussian(2000, D, 3);
    for (auto _ : state) benchmark::DoNotOptimize(encode_batch_serial(x, model));
    state.SetItemsProcessed(state.iterations() * 2000);
}

void threads_arg(benchmark::internal::Benchmark* b) {
    for (int t : {1, 2, 4}) b->Arg(t);
    b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_AssignNearest<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignNearest<true>)->Apply(threads_arg);
BENCHMARK(BM_EStep<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EStep<true>)->Apply(threads_arg);
BENCHMARK(BM_MStep<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MStep<true>)->Apply(threads_arg);
BENCHMARK(BM_ClusterSums<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClusterSums<true>)->Apply(threads_arg);
BENCHMARK(BM_EncodeScaling)
    ->Args({2, 64, 32})
    ->Args({4, 64, 32})
    ->Args({2, 128, 32})
    ->Args({2, 64, 64})
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
