#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lagcn {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void fill(double v);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// aᵀ * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * bᵀ
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Adds `bias` to every row.
void add_row_vector(Matrix& m, std::span<const double> bias);

/// Column sums, i.e. 𝟙ᵀ m.
std::vector<double> column_sums(const Matrix& m);

double frobenius_norm_squared(const Matrix& m);

/// Largest absolute elementwise difference; matrices must agree in shape.
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace lagcn
