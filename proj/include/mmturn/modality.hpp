#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mmturn {

enum class Modality : int { Text = 0, Audio = 1, Video = 2 };
inline constexpr std::size_t kNumModalities = 3;
inline constexpr std::array<Modality, kNumModalities> kAllModalities{Modality::Text, Modality::Audio,
                                                                     Modality::Video};

char modality_letter(Modality m);
std::string_view modality_name(Modality m);
/// Accepts "T"/"A"/"V" or "text"/"audio"/"video" (case-insensitive).
Modality parse_modality(std::string_view s);

/// Presence flags for {T, A, V}.
class ModalityMask {
public:
    constexpr ModalityMask() = default;
    constexpr ModalityMask(bool text, bool audio, bool video) : flags_{text, audio, video} {}

    static constexpr ModalityMask full() { return {true, true, true}; }
    static constexpr ModalityMask none() { return {}; }
    static ModalityMask only(Modality m);
    /// The seven non-empty masks: T, A, V, TA, TV, AV, TAV.
    static std::vector<ModalityMask> all_nonempty();
    /// Parses "T,A", "TA", "text+audio", or "all" (the full mask).
    static ModalityMask parse(std::string_view s);

    bool has(Modality m) const { return flags_[static_cast<std::size_t>(m)]; }
    void set(Modality m, bool present) { flags_[static_cast<std::size_t>(m)] = present; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    /// Single present modality; only meaningful when count() == 1.
    Modality single() const;
    ModalityMask intersect(const ModalityMask& other) const;
    /// "T", "TA", "TAV", or "-" for the empty mask.
    std::string to_string() const;
    /// "Text+Audio" style, used in report tables.
    std::string label() const;

    friend bool operator==(const ModalityMask&, const ModalityMask&) = default;

private:
    std::array<bool, kNumModalities> flags_{};
};

}  // namespace mmturn
