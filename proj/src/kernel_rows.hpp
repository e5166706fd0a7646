#pragma once

// Per-row arithmetic shared by the OpenMP and serial kernels so that both
// produce bitwise-identical results.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "rqgmm/kernels.hpp"

namespace rqgmm::kernels::detail {

// Fills log_joint[k] for one row and returns (log p(x), argmax k).
// Returns -inf as the log-likelihood when every component is at -inf.
struct RowPosterior {
    double loglik;
    int label;
};

inline RowPosterior e_step_row(std::span<const double> x, const Matrix& means,
                               const GmmTerms& terms, std::span<double> resp_row) noexcept {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const std::size_t K = means.rows();
    double best = kNegInf;
    int label = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double a = log_joint(x, means, terms, k);
        resp_row[k] = a;
        if (a > best) {
            best = a;
            label = static_cast<int>(k);
        }
    }
    if (best == kNegInf) return {kNegInf, label};
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(resp_row[k] - best);
    const double lse = best + std::log(s);
    for (std::size_t k = 0; k < K; ++k) resp_row[k] = std::exp(resp_row[k] - lse);
    return {lse, label};
}

inline double sum_in_order(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace rqgmm::kernels::detail
