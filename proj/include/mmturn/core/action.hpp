#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace mmturn {

inline constexpr std::size_t kNumActions = 3;

enum class Action : int { Keep = 0, Turn = 1, Backchannel = 2 };

std::string_view action_name(Action a);
/// Accepts KEEP/TURN/BACKCHANNEL (case-insensitive) and the short form BC.
std::optional<Action> parse_action(std::string_view name);
inline int action_index(Action a) { return static_cast<int>(a); }

/// Probabilities over {Keep, Turn, Backchannel}.
struct ActionDistribution {
    std::array<double, kNumActions> p{};

    double keep() const { return p[0]; }
    double turn() const { return p[1]; }
    double backchannel() const { return p[2]; }
    /// Ties go to the lowest index (Keep < Turn < Backchannel).
    Action argmax() const;

    friend bool operator==(const ActionDistribution&, const ActionDistribution&) = default;
};

}  // namespace mmturn
