#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rqgmm/kmeans.hpp"
#include "rqgmm/matrix.hpp"

namespace rqgmm {

// One residual level modelled as a diagonal-covariance Gaussian mixture.
struct GmmLevel {
    Matrix means;                 // K x D
    Matrix variances;             // K x D, every entry >= variance_floor[j]
    std::vector<double> weights;  // K, sums to 1

    std::vector<double> variance_floor;  // D
    std::vector<double> loglik_trace;    // total log-likelihood at each E-step
    std::vector<double> rmse_trace;      // reconstruction RMSE of the MAP codes at each E-step
    // Trace indices t where a reseed happened between E-steps t-1 and t; the
    // EM ascent guarantee restarts at those points.
    std::vector<int> reseed_iterations;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    std::size_t k() const noexcept { return means.rows(); }
    std::size_t d() const noexcept { return means.cols(); }
};

using Responsibilities = std::vector<double>;

// log pi_k + log N(x | mu_k, diag sigma_k^2), evaluated in log space.
double log_density(std::span<const double> x, const GmmLevel& level, int k);

// Posterior over components via log-sum-exp.
Responsibilities responsibilities(std::span<const double> x, const GmmLevel& level);

// Index of the largest posterior; ties go to the lowest index.
int map_assign(std::span<const double> gamma) noexcept;

// Relative variance floor and absolute floor applied after every M-step.
inline constexpr double kRelativeVarianceFloor = 1e-6;
inline constexpr double kAbsoluteVarianceFloor = 1e-12;
// A component whose effective count drops below this fraction of N is reseeded.
inline constexpr double kStarvationFraction = 1e-6;
inline constexpr int kMaxReseedsPerComponent = 3;

// EM for a K-component diagonal GMM, warm-started from kmeans_fit (means =
// centroids, variances = within-cluster variances, weights = cluster shares).
// Iterates E-step / M-step until the relative log-likelihood change drops
// below cfg.tol or cfg.max_iters E-steps have run. Returned parameters are
// the ones the last E-step was evaluated with.
GmmLevel em_fit(const Matrix& data, int k, const FitConfig& cfg);

// Per-dimension population variance of the rows.
std::vector<double> column_variances(const Matrix& data);

}  // namespace rqgmm
