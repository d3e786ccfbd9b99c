#pragma once

#include <span>

#include "mmturn/core/linalg.hpp"

// Data-parallel inner loops of the fusion layer. Every *_omp kernel partitions the
// output so each element is produced by one thread in the serial summation order,
// which keeps it bit-identical to its *_serial reference.
namespace mmturn::kernels {

enum class Exec { Serial, Parallel };

/// out = stacked * z, where `stacked` holds the rank factor matrices one above another.
void rank_project_serial(const Matrix& stacked, std::span<const double> z, std::span<double> out);
void rank_project_omp(const Matrix& stacked, std::span<const double> z, std::span<double> out);

/// grad_stacked += g * z^T and grad_z += stacked^T * g.
void rank_project_backward_serial(const Matrix& stacked, std::span<const double> z, std::span<const double> g,
                                  Matrix& grad_stacked, std::span<double> grad_z);
void rank_project_backward_omp(const Matrix& stacked, std::span<const double> z, std::span<const double> g,
                               Matrix& grad_stacked, std::span<double> grad_z);

inline void rank_project(Exec exec, const Matrix& stacked, std::span<const double> z, std::span<double> out) {
    if (exec == Exec::Parallel) rank_project_omp(stacked, z, out);
    else rank_project_serial(stacked, z, out);
}

inline void rank_project_backward(Exec exec, const Matrix& stacked, std::span<const double> z,
                                  std::span<const double> g, Matrix& grad_stacked, std::span<double> grad_z) {
    if (exec == Exec::Parallel) rank_project_backward_omp(stacked, z, g, grad_stacked, grad_z);
    else rank_project_backward_serial(stacked, z, g, grad_stacked, grad_z);
}

int max_threads();

}  // namespace mmturn::kernels
