#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/data/samples.hpp"
#include "mmturn/data/schema.hpp"
#include "mmturn/modality.hpp"

namespace mmturn::data {

/// Generative process for desk-scale conversations whose labels depend on
/// per-word cues in each modality, so the exact posterior is known.
struct SyntheticConfig {
    std::array<double, kNumActions> priors{0.7, 0.2, 0.1};
    std::size_t vocab_size = 50;
    std::size_t cue_tokens_per_class = 8;
    std::size_t audio_width = 16;
    std::size_t video_width = 16;
    /// Class means are mean_scale * e_y (orthogonal unit vectors).
    double mean_scale = 5.0;
    double noise_sigma = 1.0;
    /// Probability that modality k carries a class cue for a word (T, A, V).
    std::array<double, kNumModalities> cue_presence{0.6, 0.6, 0.6};
    /// Generation stops at the first utterance boundary at or past this many words.
    std::size_t num_words = 10000;
    std::size_t utterances_per_conversation = 10;
    std::size_t video_frames = 16;
    double audio_hop = 0.2;
    double video_fps = 40.0;
    /// Word durations are drawn uniformly from this many audio frames (inclusive).
    std::size_t min_word_frames = 2;
    std::size_t max_word_frames = 3;
    std::uint64_t seed = 0;

    /// Throws UsageError on a degenerate configuration.
    void validate() const;

    /// Token strings: KEEP cues, TURN cues, BACKCHANNEL cues, then neutral tokens.
    std::vector<std::string> vocabulary() const;
    std::size_t neutral_token_count() const { return vocab_size - kNumActions * cue_tokens_per_class; }
    /// Cue class of a token, std::nullopt for neutral tokens. Throws DataError for unknown tokens.
    std::optional<Action> token_class(const std::string& token) const;
    /// mean_scale * e_{label}, width `width`.
    Vector class_mean(Action label, std::size_t width) const;
};

/// Latent choices behind one generated word.
struct LatentWord {
    std::string utt_id;
    std::size_t word_idx = 0;
    Action label = Action::Keep;
    std::array<bool, kNumModalities> cue{};

    friend bool operator==(const LatentWord&, const LatentWord&) = default;
};

struct SyntheticDataset {
    Manifest manifest;
    std::vector<LatentWord> hidden;
};

/// Word labels are i.i.d. draws from the priors; an utterance runs until its first
/// non-KEEP label, so each one ends in exactly one TURN or BACKCHANNEL word. A
/// BACKCHANNEL-final utterance is overlapped by the other speaker's next utterance.
SyntheticDataset gen_synthetic(const SyntheticConfig& cfg);

void write_hidden_records(std::ostream& out, std::span<const LatentWord> hidden);
std::vector<LatentWord> read_hidden_records(std::istream& in);

/// Exact posterior p(y | present modalities) under cfg, evaluated on the current word's
/// token and last audio/video frame. Modalities missing from the sample are ignored; an
/// empty mask returns the prior.
ActionDistribution bayes_oracle(const Sample& sample, const ModalityMask& mask, const SyntheticConfig& cfg);

}  // namespace mmturn::data
