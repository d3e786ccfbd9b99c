#include "mmturn/modality.hpp"

#include <algorithm>
#include <cctype>

#include "mmturn/core/error.hpp"

namespace mmturn {

namespace {
std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}
}  // namespace

char modality_letter(Modality m) {
    switch (m) {
        case Modality::Text: return 'T';
        case Modality::Audio: return 'A';
        case Modality::Video: return 'V';
    }
    return '?';
}

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::Text: return "text";
        case Modality::Audio: return "audio";
        case Modality::Video: return "video";
    }
    return "?";
}

Modality parse_modality(std::string_view s) {
    const std::string l = lower(s);
    if (l == "t" || l == "text") return Modality::Text;
    if (l == "a" || l == "audio") return Modality::Audio;
    if (l == "v" || l == "video") return Modality::Video;
    throw UsageError("unknown modality '" + std::string(s) + "'");
}

ModalityMask ModalityMask::only(Modality m) {
    ModalityMask mask;
    mask.set(m, true);
    return mask;
}

std::vector<ModalityMask> ModalityMask::all_nonempty() {
    return {{true, false, false}, {false, true, false}, {false, false, true}, {true, true, false},
            {true, false, true},  {false, true, true},  {true, true, true}};
}

ModalityMask ModalityMask::parse(std::string_view s) {
    const std::string l = lower(s);
    if (l == "all" || l == "full") return full();
    ModalityMask mask;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        if (token.size() > 1 && token != "text" && token != "audio" && token != "video") {
            // compact form such as "tav"
            for (char c : token) mask.set(parse_modality(std::string_view(&c, 1)), true);
        } else {
            mask.set(parse_modality(token), true);
        }
        token.clear();
    };
    for (char c : l) {
        if (c == ',' || c == '+' || c == ' ') flush();
        else token.push_back(c);
    }
    flush();
    if (mask.empty()) throw UsageError("empty modality mask '" + std::string(s) + "'");
    return mask;
}

std::size_t ModalityMask::count() const {
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), true));
}

Modality ModalityMask::single() const {
    for (Modality m : kAllModalities)
        if (has(m)) return m;
    throw UsageError("ModalityMask::single on empty mask");
}

ModalityMask ModalityMask::intersect(const ModalityMask& o) const {
    return {flags_[0] && o.flags_[0], flags_[1] && o.flags_[1], flags_[2] && o.flags_[2]};
}

std::string ModalityMask::to_string() const {
    std::string s;
    for (Modality m : kAllModalities)
        if (has(m)) s.push_back(modality_letter(m));
    return s.empty() ? "-" : s;
}

std::string ModalityMask::label() const {
    static constexpr std::array<std::string_view, 3> names{"Text", "Audio", "Video"};
    std::string s;
    for (std::size_t i = 0; i < kNumModalities; ++i) {
        if (!flags_[i]) continue;
        if (!s.empty()) s += '+';
        s += names[i];
    }
    return s.empty() ? "None" : s;
}

}  // namespace mmturn
