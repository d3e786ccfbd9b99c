#include "mmturn/core/adam.hpp"

#include <cmath>

#include "mmturn/core/error.hpp"

namespace mmturn {

void adam_step(const ParamRefs& params, const ParamRefs& grads, AdamState& state) {
    check_dim("adam_step blocks", params.size(), grads.size());
    for (std::size_t b = 0; b < params.size(); ++b) check_dim("adam_step block", params[b].size(), grads[b].size());

    if (state.first_moment.empty() && state.step == 0) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    }
    check_dim("adam_step state", state.first_moment.size(), params.size());
    for (std::size_t b = 0; b < params.size(); ++b) check_dim("adam_step state block", state.first_moment[b].size(), params[b].size());

    ++state.step;
    const auto& c = state.config;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    const double b1 = c.beta1, b2 = c.beta2, lr = c.learning_rate, eps = c.epsilon;

    for (std::size_t b = 0; b < params.size(); ++b) {
        double* p = params[b].data();
        const double* g = grads[b].data();
        double* m = state.first_moment[b].data();
        double* v = state.second_moment[b].data();
        const std::size_t n = params[b].size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

}  // namespace mmturn
