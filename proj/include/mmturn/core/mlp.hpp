#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmturn/core/linalg.hpp"
#include "mmturn/core/params.hpp"
#include "mmturn/core/rng.hpp"

namespace mmturn {

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network: tanh on hidden layers, identity on the output layer.
struct MlpParams {
    std::vector<DenseLayer> layers;

    /// Glorot-uniform weights, zero biases. `sizes` lists every layer width, input first.
    static MlpParams glorot(std::span<const std::size_t> sizes, Rng& rng);
    static MlpParams zeros(std::span<const std::size_t> sizes);

    std::size_t input_width() const;
    std::size_t output_width() const;
    std::vector<std::size_t> sizes() const;
    /// Throws DimensionError if adjacent layers do not chain.
    void validate() const;

    void collect(ParamRefs& refs);

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// activations[0] is the input; activations[l + 1] is layer l's output.
struct MlpCache {
    std::vector<Vector> activations;
};

struct MlpForward {
    Vector logits;
    MlpCache cache;
};

MlpForward mlp_forward(std::span<const double> x, const MlpParams& p);

/// Accumulates parameter gradients into `grads` (same shape as `p`) and returns dL/dx.
Vector mlp_backward(const MlpParams& p, const MlpCache& cache, std::span<const double> grad_logits,
                    MlpParams& grads);

/// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
void glorot_fill(Matrix& m, Rng& rng);

}  // namespace mmturn
