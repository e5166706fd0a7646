#include "rqgmm/quantizer.hpp"

#include <limits>
#include <string>

#include "rqgmm/error.hpp"

namespace rqgmm {

int nearest_index(std::span<const double> r, const Matrix& codes, double* best_dist2) noexcept {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < codes.rows(); ++k) {
        const double d = squared_distance(r, codes.row(k));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(k);
        }
    }
    if (best_dist2 != nullptr) *best_dist2 = best_d;
    return best;
}

NearestCode nearest_code(std::span<const double> r, const Matrix& codebook) {
    if (codebook.rows() == 0) throw InputError("nearest_code: empty codebook");
    if (r.size() != codebook.cols()) {
        throw InputError("nearest_code: residual has dimension " + std::to_string(r.size()) +
                         " but codebook has " + std::to_string(codebook.cols()));
    }
    NearestCode out;
    out.index = nearest_index(r, codebook);
    const auto c = codebook.row(static_cast<std::size_t>(out.index));
    out.vector.assign(c.begin(), c.end());
    return out;
}

NearestCode nearest_code(const ResidualVector& r, const Codebook& codebook) {
    return nearest_code(std::span<const double>(r.values), codebook);
}

ResidualVector residual_step(const ResidualVector& r, std::span<const double> zq) {
    if (r.values.size() != zq.size()) {
        throw InputError("residual_step: dimension mismatch (" + std::to_string(r.values.size()) +
                         " vs " + std::to_string(zq.size()) + ")");
    }
    ResidualVector out;
    out.level = r.level + 1;
    out.values.resize(zq.size());
    for (std::size_t j = 0; j < zq.size(); ++j) out.values[j] = r.values[j] - zq[j];
    return out;
}

}  // namespace rqgmm
