#include "mmturn/data/labeler.hpp"

#include <algorithm>
#include <cctype>

namespace mmturn::data {

std::string normalize_phrase(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (std::ispunct(c)) continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

BackchannelVocabulary::BackchannelVocabulary(const std::vector<std::string>& phrases) {
    for (const auto& p : phrases) {
        auto n = normalize_phrase(p);
        if (!n.empty()) phrases_.insert(std::move(n));
    }
}

const std::vector<std::string>& BackchannelVocabulary::default_phrases() {
    static const std::vector<std::string> phrases{"yeah",  "uh-huh", "mm-hmm", "hmm",    "mhm",  "right", "okay",
                                                  "ok",    "i see",  "wow",    "really", "yes",  "sure",  "exactly"};
    return phrases;
}

BackchannelVocabulary BackchannelVocabulary::defaults() { return BackchannelVocabulary(default_phrases()); }

bool BackchannelVocabulary::contains(std::string_view text) const {
    return phrases_.count(normalize_phrase(text)) > 0;
}

namespace {
bool overlaps(double a_start, double a_end, double b_start, double b_end) {
    return std::max(a_start, b_start) < std::min(a_end, b_end);
}
}  // namespace

Conversation label_words(const Conversation& conv, const BackchannelVocabulary& vocab) {
    Conversation out = conv;
    for (auto& u : out.utterances) {
        const bool utterance_matches = vocab.contains(u.text());
        for (std::size_t i = 0; i < u.words.size(); ++i) {
            auto& w = u.words[i];
            bool overlap = false;
            if (utterance_matches || vocab.contains(w.text)) {
                for (const auto& other : conv.utterances) {
                    if (other.speaker == u.speaker) continue;
                    if (overlaps(w.t_start, w.t_end, other.start(), other.end())) {
                        overlap = true;
                        break;
                    }
                }
            }
            if (overlap) w.label = Action::Backchannel;
            else if (i + 1 == u.words.size()) w.label = Action::Turn;
            else w.label = Action::Keep;
        }
    }
    return out;
}

Manifest label_manifest(const Manifest& manifest, const BackchannelVocabulary& vocab) {
    Manifest out;
    out.header = manifest.header;
    out.conversations.reserve(manifest.conversations.size());
    for (const auto& c : manifest.conversations) out.conversations.push_back(label_words(c, vocab));
    return out;
}

}  // namespace mmturn::data
