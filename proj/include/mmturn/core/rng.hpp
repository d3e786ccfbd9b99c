#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace mmturn {

/// Counter-based generator: draw k is splitmix64(seed, k). Streams derived with
/// split() are independent of how many draws the parent has made.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n > 0.
    std::uint64_t uniform_int(std::uint64_t n);
    /// Standard normal via Box-Muller (no cached second value, so draws stay stateless).
    double normal();
    bool bernoulli(double p) { return uniform() < p; }
    /// Index drawn from an unnormalized discrete distribution.
    std::size_t categorical(std::span<const double> weights);

    Rng split(std::uint64_t stream) const;

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mmturn
