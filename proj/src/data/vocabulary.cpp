#include "mmturn/data/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mmturn/core/error.hpp"

namespace mmturn::data {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
    words_.emplace_back(kUnknownToken);
    ids_.emplace(std::string(kUnknownToken), kUnknown);
    for (const auto& w : words) {
        if (w == kUnknownToken) continue;
        auto n = normalize(w);
        if (ids_.count(n)) throw DataError("duplicate vocabulary entry '" + w + "'");
        ids_.emplace(n, static_cast<std::uint32_t>(words_.size()));
        words_.push_back(std::move(n));
    }
}

Vocabulary Vocabulary::from_manifest(const Manifest& manifest) {
    std::set<std::string> seen;
    for (const auto& c : manifest.conversations)
        for (const auto& u : c.utterances)
            for (const auto& w : u.words) seen.insert(normalize(w.text));
    return Vocabulary(std::vector<std::string>(seen.begin(), seen.end()));
}

std::string Vocabulary::normalize(std::string_view word) {
    std::string out;
    for (unsigned char c : word)
        if (!std::isspace(c)) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

std::uint32_t Vocabulary::id(std::string_view word) const {
    const auto it = ids_.find(normalize(word));
    return it == ids_.end() ? kUnknown : it->second;
}

}  // namespace mmturn::data
