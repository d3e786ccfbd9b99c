#include "mmturn/core/action.hpp"

#include <algorithm>
#include <cctype>

namespace mmturn {

std::string_view action_name(Action a) {
    switch (a) {
        case Action::Keep: return "KEEP";
        case Action::Turn: return "TURN";
        case Action::Backchannel: return "BACKCHANNEL";
    }
    return "?";
}

std::optional<Action> parse_action(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "KEEP") return Action::Keep;
    if (upper == "TURN") return Action::Turn;
    if (upper == "BACKCHANNEL" || upper == "BC") return Action::Backchannel;
    return std::nullopt;
}

Action ActionDistribution::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumActions; ++i)
        if (p[i] > p[best]) best = i;
    return static_cast<Action>(best);
}

}  // namespace mmturn
