#pragma once

#include <array>
#include <cstdint>

#include "mmturn/core/action.hpp"

namespace mmturn {

/// Rows are true labels, columns predictions.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumActions>, kNumActions> counts{};

    void add(Action truth, Action predicted) { ++counts[action_index(truth)][action_index(predicted)]; }
    std::uint64_t total() const;
    double accuracy() const;
    /// 0/0 is taken as 0 for precision, recall and F1.
    double precision(Action c) const;
    double recall(Action c) const;
    double f1(Action c) const;
    std::array<double, kNumActions> f1_all() const;
    /// Unweighted mean of the three F1 scores.
    double macro_f1() const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

}  // namespace mmturn
