#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "kernel_rows.hpp"
#include "rqgmm/error.hpp"
#include "rqgmm/kernels.hpp"
#include "rqgmm/quantizer.hpp"

namespace rqgmm::kernels::serial {

double assign_nearest(const Matrix& points, const Matrix& codes, std::span<int> labels,
                      std::span<double> dist2) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        labels[i] = nearest_index(points.row(i), codes, &dist2[i]);
    }
    return detail::sum_in_order(dist2);
}

void cluster_sums(const Matrix& points, std::span<const int> labels, Matrix& sums,
                  std::span<std::int64_t> counts) {
    std::fill(sums.values().begin(), sums.values().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto k = static_cast<std::size_t>(labels[i]);
        auto s = sums.row(k);
        const auto x = points.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) s[j] += x[j];
        ++counts[k];
    }
}

void update_min_dist2(const Matrix& points, std::span<const double> center,
                      std::span<double> dist2) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        dist2[i] = std::min(dist2[i], squared_distance(points.row(i), center));
    }
}

double e_step(const Matrix& points, const Matrix& means, const GmmTerms& terms, Matrix& resp,
              std::span<double> row_loglik, std::span<int> labels) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto r = detail::e_step_row(points.row(i), means, terms, resp.row(i));
        if (r.loglik == -std::numeric_limits<double>::infinity()) {
            throw InternalError("e_step: every mixture component has zero density at row " +
                                std::to_string(i));
        }
        row_loglik[i] = r.loglik;
        labels[i] = r.label;
    }
    return detail::sum_in_order(row_loglik);
}

void weighted_means(const Matrix& points, const Matrix& resp, std::span<double> nk,
                    Matrix& means) {
    const std::size_t K = resp.cols();
    const std::size_t D = points.cols();
    Matrix acc(K, D);
    std::fill(nk.begin(), nk.end(), 0.0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto x = points.row(i);
        for (std::size_t k = 0; k < K; ++k) {
            const double g = resp(i, k);
            if (g == 0.0) continue;
            nk[k] += g;
            for (std::size_t j = 0; j < D; ++j) acc(k, j) += g * x[j];
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (nk[k] <= 0.0) continue;
        for (std::size_t j = 0; j < D; ++j) means(k, j) = acc(k, j) / nk[k];
    }
}

void weighted_variances(const Matrix& points, const Matrix& resp, std::span<const double> nk,
                        const Matrix& means, Matrix& variances) {
    const std::size_t K = resp.cols();
    const std::size_t D = points.cols();
    Matrix acc(K, D);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto x = points.row(i);
        for (std::size_t k = 0; k < K; ++k) {
            const double g = resp(i, k);
            if (g == 0.0) continue;
            for (std::size_t j = 0; j < D; ++j) {
                const double t = x[j] - means(k, j);
                acc(k, j) += g * t * t;
            }
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (nk[k] <= 0.0) continue;
        for (std::size_t j = 0; j < D; ++j) variances(k, j) = acc(k, j) / nk[k];
    }
}

double labeled_sse(const Matrix& points, const Matrix& codes, std::span<const int> labels) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        s += squared_distance(points.row(i), codes.row(static_cast<std::size_t>(labels[i])));
    }
    return s;
}

}  // namespace rqgmm::kernels::serial
