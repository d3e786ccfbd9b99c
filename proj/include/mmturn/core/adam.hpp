#pragma once

#include <cstdint>
#include <vector>

#include "mmturn/core/params.hpp"

namespace mmturn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First/second moment accumulators, one per parameter block. The accumulators are
/// zero-filled on the first step, sized from the parameter blocks they follow.
struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    AdamState() = default;
    explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// One bias-corrected Adam update: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(const ParamRefs& params, const ParamRefs& grads, AdamState& state);

}  // namespace mmturn
