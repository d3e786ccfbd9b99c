#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmturn/data/schema.hpp"

namespace mmturn::data {

/// Whitespace/lowercase word-to-id table. Id 0 is reserved for unknown words.
class Vocabulary {
public:
    static constexpr std::uint32_t kUnknown = 0;
    static constexpr std::string_view kUnknownToken = "<unk>";

    Vocabulary();
    explicit Vocabulary(const std::vector<std::string>& words);
    /// Every distinct lowercased word in the manifest, sorted.
    static Vocabulary from_manifest(const Manifest& manifest);

    static std::string normalize(std::string_view word);

    std::uint32_t id(std::string_view word) const;
    const std::string& word(std::uint32_t id) const { return words_.at(id); }
    std::size_t size() const { return words_.size(); }
    /// All entries including the unknown token at index 0.
    const std::vector<std::string>& words() const { return words_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

}  // namespace mmturn::data
