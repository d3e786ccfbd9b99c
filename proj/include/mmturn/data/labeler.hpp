#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mmturn/data/schema.hpp"

namespace mmturn::data {

/// Lowercase, strip punctuation, collapse runs of whitespace to single spaces.
std::string normalize_phrase(std::string_view text);

/// Normalized backchannel phrases; single- or multi-word.
class BackchannelVocabulary {
public:
    BackchannelVocabulary() = default;
    explicit BackchannelVocabulary(const std::vector<std::string>& phrases);

    /// yeah, uh-huh, mm-hmm, hmm, mhm, right, okay, ok, i see, wow, really, yes, sure, exactly
    static BackchannelVocabulary defaults();
    static const std::vector<std::string>& default_phrases();

    bool contains(std::string_view text) const;
    const std::set<std::string>& phrases() const { return phrases_; }

private:
    std::set<std::string> phrases_;
};

/// Stage-5 annotation:
///  1. BACKCHANNEL iff the word (or its whole utterance, for multi-word phrases) matches
///     the vocabulary and the word's time span overlaps an utterance of the other speaker;
///  2. otherwise the last word of each utterance is TURN;
///  3. everything else is KEEP.
/// Existing labels are ignored, so relabeling is idempotent.
Conversation label_words(const Conversation& conv, const BackchannelVocabulary& vocab);
Manifest label_manifest(const Manifest& manifest, const BackchannelVocabulary& vocab);

}  // namespace mmturn::data
