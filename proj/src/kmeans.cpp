#include "rqgmm/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rqgmm/error.hpp"
#include "rqgmm/kernels.hpp"
#include "rqgmm/rng.hpp"

namespace rqgmm {

namespace {

constexpr double kRelEps = 1e-30;

void check_fit_inputs(const Matrix& data, int k, const char* who) {
    if (data.rows() == 0 || data.cols() == 0) {
        throw InputError(std::string(who) + ": data must be non-empty");
    }
    if (k < 1) throw InputError(std::string(who) + ": k must be >= 1");
    if (static_cast<std::size_t>(k) > data.rows()) {
        throw InputError(std::string(who) + ": k=" + std::to_string(k) + " exceeds N=" +
                         std::to_string(data.rows()));
    }
    require_finite(data.values(), std::string(who) + " data");
}

}  // namespace

void FitConfig::validate() const {
    if (max_iters < 1) throw InputError("max_iters must be >= 1");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw InputError("tol must be a positive number");
}

Codebook kmeanspp_init(const Matrix& data, int k, std::uint64_t seed) {
    check_fit_inputs(data, k, "kmeanspp_init");
    const std::size_t N = data.rows();
    const std::size_t D = data.cols();
    Rng rng(seed);
    Matrix centers(static_cast<std::size_t>(k), D);

    auto place = [&](std::size_t c, std::size_t row) {
        const auto x = data.row(row);
        std::copy(x.begin(), x.end(), centers.row(c).begin());
    };

    place(0, rng.below(N));
    std::vector<double> dist2(N, std::numeric_limits<double>::infinity());
    kernels::update_min_dist2(data, centers.row(0), dist2);

    for (std::size_t c = 1; c < static_cast<std::size_t>(k); ++c) {
        const double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            // Walk the cumulative D^2 mass; only rows with positive mass are eligible.
            const double target = rng.uniform() * total;
            double acc = 0.0;
            std::size_t last_positive = 0;
            bool found = false;
            for (std::size_t i = 0; i < N; ++i) {
                if (dist2[i] <= 0.0) continue;
                last_positive = i;
                acc += dist2[i];
                if (acc > target) {
                    pick = i;
                    found = true;
                    break;
                }
            }
            if (!found) pick = last_positive;
        } else {
            // Every row coincides with a chosen center.
            pick = rng.below(N);
        }
        place(c, pick);
        kernels::update_min_dist2(data, centers.row(c), dist2);
    }
    return Codebook(std::move(centers));
}

KmeansLevel kmeans_fit(const Matrix& data, int k, const FitConfig& cfg) {
    cfg.validate();
    check_fit_inputs(data, k, "kmeans_fit");
    const std::size_t N = data.rows();
    const std::size_t K = static_cast<std::size_t>(k);

    Matrix centroids = kmeanspp_init(data, k, cfg.seed);
    Matrix sums(K, data.cols());
    std::vector<int> labels(N);
    std::vector<double> dist2(N);
    std::vector<std::int64_t> counts(K);

    KmeansLevel out;
    auto has_empty = [&] {
        return std::any_of(counts.begin(), counts.end(), [](std::int64_t c) { return c == 0; });
    };
    auto assign = [&] {
        const double j = kernels::assign_nearest(data, centroids, labels, dist2);
        std::fill(counts.begin(), counts.end(), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        return j;
    };
    // Moves each empty centroid onto a distinct row, farthest-first. Inertia
    // cannot increase: nothing was assigned to the moved centroid.
    auto reseed = [&] {
        std::vector<std::size_t> order(N);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return dist2[a] > dist2[b]; });
        std::size_t next = 0;
        for (std::size_t c = 0; c < K; ++c) {
            if (counts[c] != 0) continue;
            const auto x = data.row(order[next++ % N]);
            std::copy(x.begin(), x.end(), centroids.row(c).begin());
            ++out.reseeds;
        }
    };

    for (int it = 0; it < cfg.max_iters; ++it) {
        const double inertia = assign();
        out.inertia_trace.push_back(inertia);
        out.iterations = it + 1;
        const bool empty = has_empty();
        if (it > 0 && !empty) {
            const double prev = out.inertia_trace[out.inertia_trace.size() - 2];
            if (std::abs(prev - inertia) / std::max(prev, kRelEps) < cfg.tol) {
                out.converged = true;
                break;
            }
        }
        if (it + 1 == cfg.max_iters) break;

        kernels::cluster_sums(data, labels, sums, counts);
        for (std::size_t c = 0; c < K; ++c) {
            if (counts[c] == 0) continue;
            auto mu = centroids.row(c);
            const auto s = sums.row(c);
            const double inv = static_cast<double>(counts[c]);
            for (std::size_t j = 0; j < mu.size(); ++j) mu[j] = s[j] / inv;
        }
        if (empty && cfg.reseed_empty) reseed();
    }

    // Repair pass: the iteration cap was hit with an empty cluster. Reseed and
    // reassign once; the result replaces the last trace entry (it is no larger).
    if (cfg.reseed_empty && has_empty()) {
        reseed();
        out.inertia_trace.back() = assign();
    }

    for (double j : out.inertia_trace) {
        out.rmse_trace.push_back(std::sqrt(j / static_cast<double>(N)));
    }
    out.counts = counts;
    out.centroids = Codebook(std::move(centroids));
    if (out.centroids.has_duplicate_entries()) {
        out.warnings.emplace_back("degenerate fit: two or more centroids are identical");
    }
    if (has_empty()) {
        out.warnings.emplace_back("codebook has unused entries on the training data");
    }
    return out;
}

}  // namespace rqgmm
