#include "mmturn/core/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "mmturn/core/error.hpp"

namespace mmturn {

void Vector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    check_dim("Matrix", rows * cols, data_.size());
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
    check_dim("matvec input", m.cols(), x.size());
    check_dim("matvec output", m.rows(), out.size());
    const std::size_t cols = m.cols();
    const double* w = m.data();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = w + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void matvec_add(const Matrix& m, std::span<const double> x, std::span<double> out) {
    check_dim("matvec_add input", m.cols(), x.size());
    check_dim("matvec_add output", m.rows(), out.size());
    const std::size_t cols = m.cols();
    const double* w = m.data();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = w + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
}

void matvec_transposed_add(const Matrix& m, std::span<const double> g, std::span<double> out) {
    check_dim("matvec_transposed_add input", m.rows(), g.size());
    check_dim("matvec_transposed_add output", m.cols(), out.size());
    const std::size_t cols = m.cols();
    const double* w = m.data();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * gr;
    }
}

void outer_add(Matrix& m, std::span<const double> a, std::span<const double> b) {
    check_dim("outer_add rows", m.rows(), a.size());
    check_dim("outer_add cols", m.cols(), b.size());
    const std::size_t cols = m.cols();
    double* w = m.data();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double ar = a[r];
        if (ar == 0.0) continue;
        double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) row[c] += ar * b[c];
    }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_dim("axpy", y.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace mmturn
