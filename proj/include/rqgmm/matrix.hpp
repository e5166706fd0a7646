#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rqgmm {

// Dense row-major matrix of doubles. Rows are the unit of work everywhere in
// this library (one embedding, one centroid, one responsibility row).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// N samples of dimension D; non-empty and finite by construction.
class EmbeddingMatrix : public Matrix {
public:
    EmbeddingMatrix() = default;
    explicit EmbeddingMatrix(Matrix m);
    EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<double> values);

    std::size_t n() const noexcept { return rows(); }
    std::size_t d() const noexcept { return cols(); }
};

// K code vectors of dimension D; K >= 1 and finite by construction.
class Codebook : public Matrix {
public:
    Codebook() = default;
    explicit Codebook(Matrix m);

    std::size_t k() const noexcept { return rows(); }
    std::size_t d() const noexcept { return cols(); }

    // True when two entries are bitwise-equal vectors (a degenerate fit).
    bool has_duplicate_entries() const;
};

struct ResidualVector {
    std::vector<double> values;
    int level = 0;
};

// Throws InputError naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const std::string& what);

}  // namespace rqgmm
