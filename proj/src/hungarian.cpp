#include "rqgmm/hungarian.hpp"

#include <limits>
#include <string>

#include "rqgmm/error.hpp"

namespace rqgmm {

// Shortest augmenting path formulation with row/column potentials.
std::vector<int> min_cost_assignment(const Matrix& cost) {
    const std::size_t n = cost.rows();
    if (cost.cols() != n) throw InputError("min_cost_assignment: cost matrix must be square");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based internals; column 0 is a virtual start.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(n, -1);
    for (std::size_t j = 1; j <= n; ++j) {
        if (p[j] != 0) assignment[p[j] - 1] = static_cast<int>(j - 1);
    }
    return assignment;
}

double matched_accuracy(std::span<const int> predicted, std::span<const int> truth, int k) {
    if (predicted.size() != truth.size() || predicted.empty()) {
        throw InputError("matched_accuracy: label vectors must be non-empty and equal length");
    }
    const auto K = static_cast<std::size_t>(k);
    Matrix confusion(K, K, 0.0);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || predicted[i] >= k || truth[i] < 0 || truth[i] >= k) {
            throw InputError("matched_accuracy: label out of range at index " + std::to_string(i));
        }
        confusion(static_cast<std::size_t>(predicted[i]), static_cast<std::size_t>(truth[i])) -= 1.0;
    }
    const auto match = min_cost_assignment(confusion);
    double hits = 0.0;
    for (std::size_t r = 0; r < K; ++r) hits -= confusion(r, static_cast<std::size_t>(match[r]));
    return hits / static_cast<double>(predicted.size());
}

}  // namespace rqgmm
