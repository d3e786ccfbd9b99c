#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace mmturn {

using LossFn = std::function<double(std::span<const double>)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
};

/// Central differences per coordinate against `analytic`. The per-coordinate error is
/// |g_a - g_fd| / (1e-8 + |g_a| + |g_fd|). Throws NumericError on a non-finite loss.
GradCheckResult finite_diff_check(const LossFn& loss, std::span<const double> params,
                                  std::span<const double> analytic, double h = 1e-5);

}  // namespace mmturn
