#include "mmturn/core/mlp.hpp"

#include <cmath>

#include "mmturn/core/error.hpp"

namespace mmturn {

void glorot_fill(Matrix& m, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (double& w : m.span()) w = rng.uniform(-a, a);
}

MlpParams MlpParams::glorot(std::span<const std::size_t> sizes, Rng& rng) {
    MlpParams p = zeros(sizes);
    for (auto& layer : p.layers) glorot_fill(layer.weight, rng);
    return p;
}

MlpParams MlpParams::zeros(std::span<const std::size_t> sizes) {
    if (sizes.size() < 2) throw UsageError("MlpParams: need at least an input and an output width");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        p.layers.push_back({Matrix(sizes[l + 1], sizes[l]), Vector(sizes[l + 1])});
    return p;
}

std::size_t MlpParams::input_width() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
std::size_t MlpParams::output_width() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

std::vector<std::size_t> MlpParams::sizes() const {
    std::vector<std::size_t> s;
    if (layers.empty()) return s;
    s.push_back(input_width());
    for (const auto& l : layers) s.push_back(l.weight.rows());
    return s;
}

void MlpParams::validate() const {
    if (layers.empty()) throw UsageError("MlpParams: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        check_dim("MlpParams bias", layers[l].weight.rows(), layers[l].bias.size());
        if (l > 0) check_dim("MlpParams layer chain", layers[l - 1].weight.rows(), layers[l].weight.cols());
    }
}

void MlpParams::collect(ParamRefs& refs) {
    for (auto& l : layers) {
        refs.push_back(l.weight.span());
        refs.push_back(l.bias.span());
    }
}

MlpForward mlp_forward(std::span<const double> x, const MlpParams& p) {
    check_dim("mlp_forward input", p.input_width(), x.size());
    MlpForward out;
    auto& acts = out.cache.activations;
    acts.reserve(p.layers.size() + 1);
    acts.emplace_back(std::vector<double>(x.begin(), x.end()));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        Vector y(layer.bias);
        matvec_add(layer.weight, acts.back().span(), y.span());
        if (l + 1 < p.layers.size())
            for (double& v : y) v = std::tanh(v);
        acts.push_back(std::move(y));
    }
    out.logits = acts.back();
    return out;
}

Vector mlp_backward(const MlpParams& p, const MlpCache& cache, std::span<const double> grad_logits,
                    MlpParams& grads) {
    check_dim("mlp_backward grad", p.output_width(), grad_logits.size());
    Vector delta(std::vector<double>(grad_logits.begin(), grad_logits.end()));
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        const auto& layer = p.layers[l];
        auto& g = grads.layers[l];
        const Vector& input = cache.activations[l];
        outer_add(g.weight, delta.span(), input.span());
        axpy(1.0, delta.span(), g.bias.span());
        Vector grad_in(layer.weight.cols());
        matvec_transposed_add(layer.weight, delta.span(), grad_in.span());
        if (l > 0) {
            // input to this layer is tanh output of the previous one
            for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] *= 1.0 - input[i] * input[i];
        }
        delta = std::move(grad_in);
    }
    return delta;
}

}  // namespace mmturn
