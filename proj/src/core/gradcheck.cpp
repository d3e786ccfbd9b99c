#include "mmturn/core/gradcheck.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mmturn/core/error.hpp"

namespace mmturn {

GradCheckResult finite_diff_check(const LossFn& loss, std::span<const double> params,
                                  std::span<const double> analytic, double h) {
    check_dim("finite_diff_check", params.size(), analytic.size());
    if (!(h > 0.0)) throw UsageError("finite_diff_check: step must be positive");

    std::vector<double> x(params.begin(), params.end());
    auto eval = [&](std::size_t i) {
        const double v = loss(x);
        if (!std::isfinite(v))
            throw NumericError("finite_diff_check: non-finite loss at coordinate " + std::to_string(i));
        return v;
    };
    eval(0);

    GradCheckResult result;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = eval(i);
        x[i] = orig - h;
        const double down = eval(i);
        x[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(analytic[i] - fd) / (1e-8 + std::abs(analytic[i]) + std::abs(fd));
        if (err > result.max_rel_error) {
            result.max_rel_error = err;
            result.worst_index = i;
        }
    }
    return result;
}

}  // namespace mmturn
