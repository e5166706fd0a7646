#include <omp.h>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "kernel_rows.hpp"
#include "rqgmm/error.hpp"
#include "rqgmm/kernels.hpp"
#include "rqgmm/parallel.hpp"
#include "rqgmm/quantizer.hpp"

namespace rqgmm {

void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }
int threads() { return omp_get_max_threads(); }

namespace kernels {

double assign_nearest(const Matrix& points, const Matrix& codes, std::span<int> labels,
                      std::span<double> dist2) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double d = 0.0;
        labels[i] = nearest_index(points.row(i), codes, &d);
        dist2[i] = d;
    }
    return detail::sum_in_order(dist2);
}

void cluster_sums(const Matrix& points, std::span<const int> labels, Matrix& sums,
                  std::span<std::int64_t> counts) {
    const std::size_t K = sums.rows();
    const std::size_t D = points.cols();
    // Bucket row indices by label (ascending within each bucket).
    std::vector<std::size_t> offsets(K + 1, 0);
    for (int l : labels) ++offsets[static_cast<std::size_t>(l) + 1];
    for (std::size_t k = 0; k < K; ++k) offsets[k + 1] += offsets[k];
    std::vector<std::size_t> members(labels.size());
    {
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            members[cursor[static_cast<std::size_t>(labels[i])]++] = i;
        }
    }
    const auto kk = static_cast<std::ptrdiff_t>(K);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < kk; ++k) {
        auto s = sums.row(k);
        std::fill(s.begin(), s.end(), 0.0);
        for (std::size_t m = offsets[k]; m < offsets[k + 1]; ++m) {
            const auto x = points.row(members[m]);
            for (std::size_t j = 0; j < D; ++j) s[j] += x[j];
        }
        counts[k] = static_cast<std::int64_t>(offsets[k + 1] - offsets[k]);
    }
}

void update_min_dist2(const Matrix& points, std::span<const double> center,
                      std::span<double> dist2) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double d = squared_distance(points.row(i), center);
        if (d < dist2[i]) dist2[i] = d;
    }
}

double e_step(const Matrix& points, const Matrix& means, const GmmTerms& terms, Matrix& resp,
              std::span<double> row_loglik, std::span<int> labels) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
    std::ptrdiff_t bad_row = -1;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto r = detail::e_step_row(points.row(i), means, terms, resp.row(i));
        row_loglik[i] = r.loglik;
        labels[i] = r.label;
        if (r.loglik == -std::numeric_limits<double>::infinity()) {
#pragma omp critical(rqgmm_bad_row)
            bad_row = bad_row < 0 ? i : std::min(bad_row, i);
        }
    }
    if (bad_row >= 0) {
        throw InternalError("e_step: every mixture component has zero density at row " +
                            std::to_string(bad_row));
    }
    return detail::sum_in_order(row_loglik);
}

void weighted_means(const Matrix& points, const Matrix& resp, std::span<double> nk,
                    Matrix& means) {
    const std::size_t N = points.rows();
    const std::size_t D = points.cols();
    const auto kk = static_cast<std::ptrdiff_t>(resp.cols());
#pragma omp parallel
    {
        std::vector<double> acc(D);
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t k = 0; k < kk; ++k) {
            std::fill(acc.begin(), acc.end(), 0.0);
            double w = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double g = resp(i, k);
                if (g == 0.0) continue;
                w += g;
                const auto x = points.row(i);
                for (std::size_t j = 0; j < D; ++j) acc[j] += g * x[j];
            }
            nk[k] = w;
            if (w > 0.0) {
                auto mu = means.row(k);
                for (std::size_t j = 0; j < D; ++j) mu[j] = acc[j] / w;
            }
        }
    }
}

void weighted_variances(const Matrix& points, const Matrix& resp, std::span<const double> nk,
                        const Matrix& means, Matrix& variances) {
    const std::size_t N = points.rows();
    const std::size_t D = points.cols();
    const auto kk = static_cast<std::ptrdiff_t>(resp.cols());
#pragma omp parallel
    {
        std::vector<double> acc(D);
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t k = 0; k < kk; ++k) {
            if (nk[k] <= 0.0) continue;
            std::fill(acc.begin(), acc.end(), 0.0);
            const auto mu = means.row(k);
            for (std::size_t i = 0; i < N; ++i) {
                const double g = resp(i, k);
                if (g == 0.0) continue;
                const auto x = points.row(i);
                for (std::size_t j = 0; j < D; ++j) {
                    const double t = x[j] - mu[j];
                    acc[j] += g * t * t;
                }
            }
            auto v = variances.row(k);
            for (std::size_t j = 0; j < D; ++j) v[j] = acc[j] / nk[k];
        }
    }
}

double labeled_sse(const Matrix& points, const Matrix& codes, std::span<const int> labels) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
    std::vector<double> row(points.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        row[i] = squared_distance(points.row(i), codes.row(static_cast<std::size_t>(labels[i])));
    }
    return detail::sum_in_order(row);
}

}  // namespace kernels
}  // namespace rqgmm
