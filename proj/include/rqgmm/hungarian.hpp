#pragma once

#include <span>
#include <vector>

#include "rqgmm/matrix.hpp"

namespace rqgmm {

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(n^3)). Returns assignment[row] = column.
std::vector<int> min_cost_assignment(const Matrix& cost);

// Fraction of samples whose predicted label maps to the true label under the
// best one-to-one relabelling. Labels must lie in [0, k).
double matched_accuracy(std::span<const int> predicted, std::span<const int> truth, int k);

}  // namespace rqgmm
