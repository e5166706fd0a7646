#include "rqgmm/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "rqgmm/error.hpp"

namespace rqgmm {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
        throw InputError("matrix value count " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(std::span<const double> values, const std::string& what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InputError(what + " contains a non-finite value at flat index " +
                             std::to_string(i));
        }
    }
}

EmbeddingMatrix::EmbeddingMatrix(Matrix m) : Matrix(std::move(m)) {
    if (rows() == 0 || cols() == 0) {
        throw InputError("embedding matrix must have n >= 1 and d >= 1");
    }
    require_finite(values(), "embedding matrix");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<double> values)
    : EmbeddingMatrix(Matrix(n, d, std::move(values))) {}

Codebook::Codebook(Matrix m) : Matrix(std::move(m)) {
    if (rows() == 0) {
        throw InputError("codebook must contain at least one vector");
    }
    if (cols() == 0) {
        throw InputError("codebook vectors must have dimension >= 1");
    }
    require_finite(values(), "codebook");
}

bool Codebook::has_duplicate_entries() const {
    for (std::size_t a = 0; a < k(); ++a) {
        for (std::size_t b = a + 1; b < k(); ++b) {
            if (std::equal(row(a).begin(), row(a).end(), row(b).begin())) return true;
        }
    }
    return false;
}

}  // namespace rqgmm
