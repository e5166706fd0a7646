#include "rqgmm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rqgmm/error.hpp"
#include "rqgmm/kernels.hpp"

namespace rqgmm {

namespace {

void check_level_index(const GmmLevel& level, int k) {
    if (k < 0 || static_cast<std::size_t>(k) >= level.k()) {
        throw InputError("component index " + std::to_string(k) + " out of range [0, " +
                         std::to_string(level.k()) + ")");
    }
}

void check_dim(std::span<const double> x, const GmmLevel& level) {
    if (x.size() != level.d()) {
        throw InputError("vector has dimension " + std::to_string(x.size()) +
                         " but mixture has " + std::to_string(level.d()));
    }
}

}  // namespace

std::vector<double> column_variances(const Matrix& data) {
    const std::size_t N = data.rows();
    const std::size_t D = data.cols();
    std::vector<double> mean(D, 0.0);
    std::vector<double> var(D, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < D; ++j) mean[j] += x[j];
    }
    for (double& m : mean) m /= static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < D; ++j) {
            const double t = x[j] - mean[j];
            var[j] += t * t;
        }
    }
    for (double& v : var) v /= static_cast<double>(N);
    return var;
}

double log_density(std::span<const double> x, const GmmLevel& level, int k) {
    check_level_index(level, k);
    check_dim(x, level);
    const auto terms = kernels::make_gmm_terms(level.means, level.variances, level.weights);
    return kernels::log_joint(x, level.means, terms, static_cast<std::size_t>(k));
}

Responsibilities responsibilities(std::span<const double> x, const GmmLevel& level) {
    check_dim(x, level);
    const std::size_t K = level.k();
    const auto terms = kernels::make_gmm_terms(level.means, level.variances, level.weights);
    Responsibilities gamma(K);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
        gamma[k] = kernels::log_joint(x, level.means, terms, k);
        best = std::max(best, gamma[k]);
    }
    if (best == -std::numeric_limits<double>::infinity()) {
        throw InternalError("responsibilities: every component has zero density");
    }
    double s = 0.0;
    for (double a : gamma) s += std::exp(a - best);
    const double lse = best + std::log(s);
    for (double& g : gamma) g = std::exp(g - lse);
    return gamma;
}

int map_assign(std::span<const double> gamma) noexcept {
    int best = 0;
    for (std::size_t k = 1; k < gamma.size(); ++k) {
        if (gamma[k] > gamma[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

GmmLevel em_fit(const Matrix& data, int k, const FitConfig& cfg) {
    const KmeansLevel init = kmeans_fit(data, k, cfg);  // validates inputs
    const std::size_t N = data.rows();
    const std::size_t D = data.cols();
    const std::size_t K = static_cast<std::size_t>(k);

    GmmLevel out;
    const std::vector<double> global_var = column_variances(data);
    out.variance_floor.resize(D);
    for (std::size_t j = 0; j < D; ++j) {
        out.variance_floor[j] =
            std::max(kRelativeVarianceFloor * global_var[j], kAbsoluteVarianceFloor);
    }
    auto apply_floor = [&](Matrix& v) {
        for (std::size_t c = 0; c < K; ++c) {
            auto row = v.row(c);
            for (std::size_t j = 0; j < D; ++j) row[j] = std::max(row[j], out.variance_floor[j]);
        }
    };

    // Warm start from the K-means partition.
    Matrix means = init.centroids;
    Matrix variances(K, D);
    std::vector<double> weights(K);
    {
        std::vector<int> labels(N);
        std::vector<double> dist2(N);
        kernels::assign_nearest(data, means, labels, dist2);
        Matrix hard(N, K, 0.0);
        std::vector<double> nk(K, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            hard(i, c) = 1.0;
            nk[c] += 1.0;
        }
        for (std::size_t c = 0; c < K; ++c) {
            std::copy(global_var.begin(), global_var.end(), variances.row(c).begin());
        }
        kernels::weighted_variances(data, hard, nk, means, variances);
        apply_floor(variances);
        for (std::size_t c = 0; c < K; ++c) weights[c] = nk[c] / static_cast<double>(N);
    }

    Matrix resp(N, K);
    std::vector<double> row_ll(N);
    std::vector<int> labels(N);
    std::vector<double> nk(K);
    std::vector<int> reseed_count(K, 0);
    std::vector<bool> dead(K, false);  // starved with no distinct row to take over
    bool reseeded_last = false;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const auto terms = kernels::make_gmm_terms(means, variances, weights);
        const double ll = kernels::e_step(data, means, terms, resp, row_ll, labels);
        out.loglik_trace.push_back(ll);
        out.rmse_trace.push_back(
            std::sqrt(kernels::labeled_sse(data, means, labels) / static_cast<double>(N)));
        out.iterations = it + 1;
        if (it > 0 && !reseeded_last) {
            const double prev = out.loglik_trace[out.loglik_trace.size() - 2];
            if (std::abs(ll - prev) / std::max(std::abs(prev), 1e-30) < cfg.tol) {
                out.converged = true;
                break;
            }
        }
        if (it + 1 == cfg.max_iters) break;

        // M-step
        kernels::weighted_means(data, resp, nk, means);
        kernels::weighted_variances(data, resp, nk, means, variances);
        apply_floor(variances);
        const double total = std::accumulate(nk.begin(), nk.end(), 0.0);
        for (std::size_t c = 0; c < K; ++c) weights[c] = nk[c] / total;

        // Starved components take over the worst-explained rows.
        reseeded_last = false;
        std::vector<std::size_t> order;
        std::size_t cursor = 0;
        const double starve = kStarvationFraction * static_cast<double>(N);
        for (std::size_t c = 0; c < K; ++c) {
            if (nk[c] >= starve || dead[c]) continue;
            if (order.empty()) {
                order.resize(N);
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(),
                                 [&](std::size_t a, std::size_t b) { return row_ll[a] < row_ll[b]; });
            }
            // Skip rows that coincide with a live component's mean: placing a
            // component there would just split that component.
            auto coincides = [&](std::size_t row) {
                const auto x = data.row(row);
                for (std::size_t o = 0; o < K; ++o) {
                    if (o == c || nk[o] < starve) continue;
                    const auto mu = means.row(o);
                    if (std::equal(x.begin(), x.end(), mu.begin())) return true;
                }
                return false;
            };
            while (cursor < N && coincides(order[cursor])) ++cursor;
            if (cursor >= N) {
                dead[c] = true;
                out.warnings.push_back("degenerate fit: component " + std::to_string(c) +
                                       " has no distinct data to model and keeps near-zero weight");
                continue;
            }
            if (reseed_count[c] >= kMaxReseedsPerComponent) {
                throw FitError("component " + std::to_string(c) + " starved after " +
                                   std::to_string(kMaxReseedsPerComponent) + " reseeds",
                               -1, static_cast<int>(c));
            }
            ++reseed_count[c];
            const auto x = data.row(order[cursor++]);
            std::copy(x.begin(), x.end(), means.row(c).begin());
            auto v = variances.row(c);
            for (std::size_t j = 0; j < D; ++j) v[j] = std::max(global_var[j], out.variance_floor[j]);
            weights[c] = 1.0 / static_cast<double>(K);
            reseeded_last = true;
        }
        if (reseeded_last) {
            const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
            for (double& w : weights) w /= s;
            out.reseed_iterations.push_back(it + 1);
        }
    }

    out.means = std::move(means);
    out.variances = std::move(variances);
    out.weights = std::move(weights);
    if (Codebook(out.means).has_duplicate_entries()) {
        out.warnings.emplace_back("degenerate fit: two or more component means are identical");
    }
    return out;
}

}  // namespace rqgmm
