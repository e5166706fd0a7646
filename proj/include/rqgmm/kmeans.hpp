#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rqgmm/matrix.hpp"

namespace rqgmm {

// Shared by the K-means and EM fitters. Defaults: 30 iterations and a 1e-6
// relative-change threshold.
struct FitConfig {
    int max_iters = 30;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    bool reseed_empty = true;

    void validate() const;
};

struct KmeansLevel {
    Codebook centroids;
    std::vector<std::int64_t> counts;   // final assignment sizes, sums to N
    std::vector<double> inertia_trace;  // sum of squared distances after each assignment
    std::vector<double> rmse_trace;     // sqrt(inertia / N), same length
    int iterations = 0;
    bool converged = false;
    int reseeds = 0;
    std::vector<std::string> warnings;
};

// k-means++ seeding: first center uniform, each next one drawn with probability
// proportional to its squared distance from the nearest chosen center.
Codebook kmeanspp_init(const Matrix& data, int k, std::uint64_t seed);

// Lloyd iterations from k-means++ seeds. Each iteration assigns every row to
// its nearest centroid, records the inertia, then moves centroids to cluster
// means. Stops when |J_t - J_{t-1}| / max(J_{t-1}, 1e-30) < tol (and no
// cluster is empty) or after max_iters assignments. The returned centroids
// and counts always correspond to the last assignment.
//
// Empty clusters (reseed_empty) take the row farthest from its own centroid.
KmeansLevel kmeans_fit(const Matrix& data, int k, const FitConfig& cfg);

}  // namespace rqgmm
