#include "mmturn/kernels.hpp"

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mmturn/core/error.hpp"

namespace mmturn::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void rank_project_serial(const Matrix& stacked, std::span<const double> z, std::span<double> out) {
    matvec(stacked, z, out);
}

void rank_project_omp(const Matrix& stacked, std::span<const double> z, std::span<double> out) {
    check_dim("rank_project input", stacked.cols(), z.size());
    check_dim("rank_project output", stacked.rows(), out.size());
    const auto rows = static_cast<std::ptrdiff_t>(stacked.rows());
    const std::size_t cols = stacked.cols();
    const double* w = stacked.data();
    const double* x = z.data();
    double* y = out.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void rank_project_backward_serial(const Matrix& stacked, std::span<const double> z, std::span<const double> g,
                                  Matrix& grad_stacked, std::span<double> grad_z) {
    outer_add(grad_stacked, g, z);
    matvec_transposed_add(stacked, g, grad_z);
}

void rank_project_backward_omp(const Matrix& stacked, std::span<const double> z, std::span<const double> g,
                               Matrix& grad_stacked, std::span<double> grad_z) {
    check_dim("rank_project_backward rows", stacked.rows(), g.size());
    check_dim("rank_project_backward cols", stacked.cols(), z.size());
    check_dim("rank_project_backward grad_z", stacked.cols(), grad_z.size());
    check_dim("rank_project_backward grad rows", stacked.rows(), grad_stacked.rows());
    const std::size_t rows = stacked.rows();
    const auto cols = static_cast<std::ptrdiff_t>(stacked.cols());
    const double* w = stacked.data();
    double* gw = grad_stacked.data();
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
            const double gr = g[static_cast<std::size_t>(r)];
            if (gr == 0.0) continue;
            double* row = gw + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
            for (std::ptrdiff_t c = 0; c < cols; ++c) row[c] += gr * z[static_cast<std::size_t>(c)];
        }
        // each thread owns a column block and walks the rows in serial order
        const auto threads = static_cast<std::size_t>(omp_get_num_threads());
        const auto t = static_cast<std::size_t>(omp_get_thread_num());
        const auto ncols = static_cast<std::size_t>(cols);
        const std::size_t c0 = ncols * t / threads;
        const std::size_t c1 = ncols * (t + 1) / threads;
        for (std::size_t r = 0; r < rows; ++r) {
            const double gr = g[r];
            if (gr == 0.0) continue;
            const double* row = w + r * ncols;
            for (std::size_t c = c0; c < c1; ++c) grad_z[c] += row[c] * gr;
        }
    }
}

}  // namespace mmturn::kernels
