#include "mmturn/core/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmturn/core/error.hpp"

namespace mmturn {

ActionDistribution softmax(std::span<const double> logits) {
    check_dim("softmax", kNumActions, logits.size());
    const double m = std::max({logits[0], logits[1], logits[2]});
    ActionDistribution d;
    double z = 0.0;
    for (std::size_t i = 0; i < kNumActions; ++i) {
        d.p[i] = std::exp(logits[i] - m);
        z += d.p[i];
    }
    for (double& v : d.p) v /= z;
    return d;
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, int label) {
    check_dim("softmax_cross_entropy", kNumActions, logits.size());
    if (label < 0 || label >= static_cast<int>(kNumActions))
        throw UsageError("softmax_cross_entropy: label " + std::to_string(label) + " out of range [0, 3)");
    const double m = std::max({logits[0], logits[1], logits[2]});
    double z = 0.0;
    for (double l : logits) z += std::exp(l - m);
    const double log_z = std::log(z);

    CrossEntropy out;
    out.loss = -(logits[label] - m - log_z);
    out.probs = softmax(logits);
    out.grad_logits = Vector(kNumActions);
    for (std::size_t i = 0; i < kNumActions; ++i)
        out.grad_logits[i] = out.probs.p[i] - (static_cast<int>(i) == label ? 1.0 : 0.0);
    return out;
}

}  // namespace mmturn
