#include "mmturn/metrics.hpp"

namespace mmturn {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts)
        for (auto c : row) n += c;
    return n;
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    if (n == 0) return 0.0;
    std::uint64_t hit = 0;
    for (std::size_t i = 0; i < kNumActions; ++i) hit += counts[i][i];
    return static_cast<double>(hit) / static_cast<double>(n);
}

double ConfusionMatrix::precision(Action c) const {
    const auto k = static_cast<std::size_t>(action_index(c));
    std::uint64_t col = 0;
    for (std::size_t i = 0; i < kNumActions; ++i) col += counts[i][k];
    return col == 0 ? 0.0 : static_cast<double>(counts[k][k]) / static_cast<double>(col);
}

double ConfusionMatrix::recall(Action c) const {
    const auto k = static_cast<std::size_t>(action_index(c));
    std::uint64_t row = 0;
    for (std::size_t j = 0; j < kNumActions; ++j) row += counts[k][j];
    return row == 0 ? 0.0 : static_cast<double>(counts[k][k]) / static_cast<double>(row);
}

double ConfusionMatrix::f1(Action c) const {
    const double p = precision(c);
    const double r = recall(c);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::array<double, kNumActions> ConfusionMatrix::f1_all() const {
    return {f1(Action::Keep), f1(Action::Turn), f1(Action::Backchannel)};
}

double ConfusionMatrix::macro_f1() const {
    const auto f = f1_all();
    return (f[0] + f[1] + f[2]) / 3.0;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (std::size_t i = 0; i < kNumActions; ++i)
        for (std::size_t j = 0; j < kNumActions; ++j) counts[i][j] += other.counts[i][j];
    return *this;
}

}  // namespace mmturn
