#pragma once

#include <span>

#include "mmturn/core/action.hpp"
#include "mmturn/core/linalg.hpp"

namespace mmturn {

struct CrossEntropy {
    double loss = 0.0;
    ActionDistribution probs;
    Vector grad_logits;  // probs - onehot(label)
};

/// Max-subtracted softmax over three logits.
ActionDistribution softmax(std::span<const double> logits);

CrossEntropy softmax_cross_entropy(std::span<const double> logits, int label);
inline CrossEntropy softmax_cross_entropy(std::span<const double> logits, Action label) {
    return softmax_cross_entropy(logits, action_index(label));
}

}  // namespace mmturn
