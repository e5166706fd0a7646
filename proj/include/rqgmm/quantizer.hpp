#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rqgmm/matrix.hpp"

namespace rqgmm {

struct NearestCode {
    int index = -1;
    std::vector<double> vector;
};

// Squared Euclidean distance accumulated in double.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

// Index of the closest row of `codes`; ties go to the lowest index.
// No validation: callers guarantee matching dimensions and a non-empty codebook.
int nearest_index(std::span<const double> r, const Matrix& codes, double* best_dist2 = nullptr) noexcept;

NearestCode nearest_code(std::span<const double> r, const Matrix& codebook);
NearestCode nearest_code(const ResidualVector& r, const Codebook& codebook);

ResidualVector residual_step(const ResidualVector& r, std::span<const double> zq);

}  // namespace rqgmm
