#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mmturn {

/// Dense real vector with a width fixed at construction.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
    Vector(std::initializer_list<double> values) : data_(values) {}
    explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    void fill(double v);

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> data_;
};

/// Dense row-major matrix with immutable shape.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }

    void fill(double v);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Kernels below check shapes and throw DimensionError on mismatch.

/// out = m * x
void matvec(const Matrix& m, std::span<const double> x, std::span<double> out);
/// out += m * x
void matvec_add(const Matrix& m, std::span<const double> x, std::span<double> out);
/// out += m^T * g
void matvec_transposed_add(const Matrix& m, std::span<const double> g, std::span<double> out);
/// m += a * b^T
void outer_add(Matrix& m, std::span<const double> a, std::span<const double> b);
/// y += x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

bool all_finite(std::span<const double> v);
double max_abs(std::span<const double> v);

}  // namespace mmturn
