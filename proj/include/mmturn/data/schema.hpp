#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/core/linalg.hpp"
#include "mmturn/encoders.hpp"

namespace mmturn::data {

inline constexpr int kSchemaVersion = 1;

struct WordFrame {
    std::string text;
    double t_start = 0.0;
    double t_end = 0.0;
    std::string speaker;
    std::optional<Action> label;

    friend bool operator==(const WordFrame&, const WordFrame&) = default;
};

struct TimedFrame {
    double t = 0.0;
    Vector values;

    friend bool operator==(const TimedFrame&, const TimedFrame&) = default;
};

/// A sentence-level clip by one speaker. Audio frames are evenly spaced by the
/// manifest's audio hop starting at the first word's t_start; video frames carry
/// their own timestamps.
struct Utterance {
    std::string conv_id;
    std::string utt_id;
    std::string speaker;
    std::vector<WordFrame> words;
    std::optional<std::vector<Vector>> audio_frames;
    std::optional<std::vector<TimedFrame>> video_frames;

    double start() const { return words.front().t_start; }
    double end() const { return words.back().t_end; }
    /// Words joined by single spaces.
    std::string text() const;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Conversation {
    std::string conv_id;
    std::vector<std::string> speakers;  // at most two, in order of first appearance
    std::vector<Utterance> utterances;

    friend bool operator==(const Conversation&, const Conversation&) = default;
};

struct ManifestHeader {
    int schema_version = kSchemaVersion;
    std::size_t audio_width = 0;
    std::size_t video_width = 0;
    std::size_t video_frames = kDefaultVideoFrames;
    double audio_hop = 0.02;

    friend bool operator==(const ManifestHeader&, const ManifestHeader&) = default;
};

struct Manifest {
    ManifestHeader header;
    std::vector<Conversation> conversations;

    std::size_t word_count() const;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

}  // namespace mmturn::data
