#include <cmath>
#include <limits>
#include <numbers>

#include "rqgmm/error.hpp"
#include "rqgmm/kernels.hpp"

namespace rqgmm::kernels {

GmmTerms make_gmm_terms(const Matrix& means, const Matrix& variances,
                        std::span<const double> weights) {
    const std::size_t K = means.rows();
    const std::size_t D = means.cols();
    GmmTerms t{Matrix(K, D), std::vector<double>(K)};
    const double log_two_pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < K; ++k) {
        double log_det = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            const double v = variances(k, j);
            t.inv_var(k, j) = 1.0 / v;
            log_det += log_two_pi + std::log(v);
        }
        t.log_norm[k] = weights[k] > 0.0 ? std::log(weights[k]) - 0.5 * log_det
                                         : -std::numeric_limits<double>::infinity();
    }
    return t;
}

double log_joint(std::span<const double> x, const Matrix& means, const GmmTerms& terms,
                 std::size_t k) noexcept {
    const auto mu = means.row(k);
    const auto iv = terms.inv_var.row(k);
    double q = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double t = x[j] - mu[j];
        q += t * t * iv[j];
    }
    return terms.log_norm[k] - 0.5 * q;
}

}  // namespace rqgmm::kernels
