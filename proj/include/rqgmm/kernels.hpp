#pragma once

// Data-parallel inner loops shared by the K-means and EM fitters.
//
// Every kernel exists twice: rqgmm::kernels (OpenMP) and
// rqgmm::kernels::serial (plain loops, kept as the reference the parallel
// versions are tested and benchmarked against). Both accumulate in the same
// order, so they agree bitwise and neither depends on the worker count:
//   - per-row results are written independently;
//   - per-component sums walk the rows in ascending order;
//   - scalar totals are summed from a per-row array in row order.

#include <cstdint>
#include <span>
#include <vector>

#include "rqgmm/matrix.hpp"

namespace rqgmm::kernels {

// Per-component constants of a diagonal Gaussian mixture:
//   log_norm[k] = log w_k - 0.5 * sum_j log(2 pi var_kj)
//   inv_var(k, j) = 1 / var_kj
// Components with zero weight get log_norm = -inf.
struct GmmTerms {
    Matrix inv_var;
    std::vector<double> log_norm;
};

GmmTerms make_gmm_terms(const Matrix& means, const Matrix& variances,
                        std::span<const double> weights);

// log w_k + log N(x | mu_k, diag var_k) for one row.
double log_joint(std::span<const double> x, const Matrix& means, const GmmTerms& terms,
                 std::size_t k) noexcept;

// labels[i] = argmin_k ||x_i - c_k||^2, dist2[i] the minimum. Returns sum(dist2).
double assign_nearest(const Matrix& points, const Matrix& codes, std::span<int> labels,
                      std::span<double> dist2);

// sums(k, :) = sum of rows with label k, counts[k] = their number.
void cluster_sums(const Matrix& points, std::span<const int> labels, Matrix& sums,
                  std::span<std::int64_t> counts);

// Lowers dist2[i] to ||x_i - center||^2 where that is smaller (k-means++ seeding).
void update_min_dist2(const Matrix& points, std::span<const double> center,
                      std::span<double> dist2);

// E-step. Fills resp (N x K posteriors), row_loglik[i] = log p(x_i), and
// labels[i] = argmax_k of the log joint (lowest index on ties).
// Returns total log-likelihood. Throws InternalError if some row has every
// component at -inf.
double e_step(const Matrix& points, const Matrix& means, const GmmTerms& terms, Matrix& resp,
              std::span<double> row_loglik, std::span<int> labels);

// nk[k] = sum_i resp(i,k); means(k,:) = sum_i resp(i,k) x_i / nk[k].
// Rows with nk[k] == 0 keep their previous mean.
void weighted_means(const Matrix& points, const Matrix& resp, std::span<double> nk,
                    Matrix& means);

// variances(k,j) = sum_i resp(i,k) (x_ij - mu_kj)^2 / nk[k], unfloored.
// Rows with nk[k] == 0 are left untouched.
void weighted_variances(const Matrix& points, const Matrix& resp, std::span<const double> nk,
                        const Matrix& means, Matrix& variances);

// sum_i ||x_i - codes(labels[i])||^2
double labeled_sse(const Matrix& points, const Matrix& codes, std::span<const int> labels);

namespace serial {

double assign_nearest(const Matrix& points, const Matrix& codes, std::span<int> labels,
                      std::span<double> dist2);
void cluster_sums(const Matrix& points, std::span<const int> labels, Matrix& sums,
                  std::span<std::int64_t> counts);
void update_min_dist2(const Matrix& points, std::span<const double> center,
                      std::span<double> dist2);
double e_step(const Matrix& points, const Matrix& means, const GmmTerms& terms, Matrix& resp,
              std::span<double> row_loglik, std::span<int> labels);
void weighted_means(const Matrix& points, const Matrix& resp, std::span<double> nk,
                    Matrix& means);
void weighted_variances(const Matrix& points, const Matrix& resp, std::span<const double> nk,
                        const Matrix& means, Matrix& variances);
double labeled_sse(const Matrix& points, const Matrix& codes, std::span<const int> labels);

}  // namespace serial

}  // namespace rqgmm::kernels
