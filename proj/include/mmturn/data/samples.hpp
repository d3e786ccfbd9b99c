#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/data/schema.hpp"
#include "mmturn/data/vocabulary.hpp"
#include "mmturn/encoders.hpp"
#include "mmturn/modality.hpp"

namespace mmturn::data {

/// Model input for one word frame: the word prefix, the audio since utterance start,
/// and the last n video frames, plus the word's label.
struct Sample {
    std::string conv_id;
    std::string utt_id;
    std::size_t word_index = 0;
    std::vector<std::string> words;  // prefix, current word last
    std::array<std::optional<ModalInput>, kNumModalities> inputs;
    Action label = Action::Keep;

    ModalityMask available() const;
    const ModalInput* input(Modality m) const {
        const auto& in = inputs[static_cast<std::size_t>(m)];
        return in ? &*in : nullptr;
    }
};

struct SampleOptions {
    std::size_t video_frames = kDefaultVideoFrames;
    double audio_hop = 0.02;
};

/// Number of audio frames that start before `t_end`, counting from `t0` at `hop` spacing.
std::size_t audio_frames_through(double t0, double t_end, double hop);

/// One Sample per word. Video frames are those with t <= t_end(i), last n, left-padded
/// with the earliest selected frame. Before the utterance's first video frame the window
/// is n copies of that frame, all marked as padding. Missing streams leave the modality
/// absent. Throws DataError on unlabeled words.
std::vector<Sample> build_samples(const Utterance& utt, const Vocabulary& vocab, const SampleOptions& options);
/// Uses the manifest header's n and audio hop.
std::vector<Sample> build_samples(const Manifest& manifest, const Vocabulary& vocab);
std::vector<Sample> build_samples(const Manifest& manifest, const Vocabulary& vocab, const SampleOptions& options);

/// Precomputed backbone embedding for one (utterance, word, modality).
struct FeatureRecord {
    std::string utt_id;
    std::size_t word_idx = 0;
    Modality modality = Modality::Text;
    Vector values;
};

/// JSON Lines {utt_id, word_idx, modality, dim, values}.
std::vector<FeatureRecord> read_feature_records(std::istream& in);
std::vector<FeatureRecord> read_feature_records(const std::filesystem::path& path);
void write_feature_records(std::ostream& out, std::span<const FeatureRecord> records);

/// Validates width and finiteness; returns the stored values unchanged.
Vector load_precomputed(const FeatureRecord& record, std::size_t expected_width = kDefaultFeatureWidth);

/// Replaces the matching modality inputs with PrecomputedFeature. Returns how many
/// samples were updated.
std::size_t attach_precomputed(std::span<Sample> samples, std::span<const FeatureRecord> records,
                               std::size_t expected_width = kDefaultFeatureWidth);

}  // namespace mmturn::data
