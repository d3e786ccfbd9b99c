#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmturn/core/adam.hpp"
#include "mmturn/core/params.hpp"
#include "mmturn/data/vocabulary.hpp"
#include "mmturn/encoders.hpp"
#include "mmturn/fusion.hpp"
#include "mmturn/modality.hpp"

namespace mmturn {

inline constexpr int kCheckpointFormatVersion = 1;

/// Shape of every network in a bundle.
struct ModelConfig {
    std::size_t audio_width = 16;
    std::size_t video_width = 16;
    std::size_t encoder_hidden = 64;
    std::size_t feature_width = kDefaultFeatureWidth;
    std::vector<std::size_t> head_hidden{64};
    std::size_t rank = 16;
    std::size_t fused_width = 256;
    std::vector<std::size_t> fusion_head_hidden{64};
    std::size_t video_frames = kDefaultVideoFrames;
    double audio_hop = 0.02;

    EncoderConfig encoder_config(Modality m, std::size_t vocab_size) const;
    FusionConfig fusion_config() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Encoders and fusion trained end to end in stage 2. Heads of the encoders are carried
/// along unchanged and excluded from collect().
struct JointModel {
    std::array<EncoderParams, kNumModalities> encoders;
    FusionParams fusion;

    EncoderParams& encoder(Modality m) { return encoders[static_cast<std::size_t>(m)]; }
    const EncoderParams& encoder(Modality m) const { return encoders[static_cast<std::size_t>(m)]; }

    JointModel zeros_like() const;
    void collect(ParamRefs& refs);

    friend bool operator==(const JointModel&, const JointModel&) = default;
};

/// One completed training run, kept in the checkpoint.
struct StageRecord {
    std::string stage;  // "unimodal" or "joint"
    std::string modalities;
    std::size_t epochs = 0;
    std::size_t samples = 0;
    double learning_rate = 0.0;
    double drop_probability = 0.0;
    std::uint64_t seed = 0;
    bool from_scratch = false;

    friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

/// Everything needed to run inference: stage-1 encoders with their heads (used for
/// uni-modal masks) and the stage-2 joint model (used for two or more modalities).
struct ModelBundle {
    ModelConfig config;
    data::Vocabulary vocab;
    AdamConfig adam;
    std::array<EncoderParams, kNumModalities> unimodal;
    std::array<bool, kNumModalities> unimodal_trained{};
    JointModel joint;
    bool joint_trained = false;
    std::vector<StageRecord> history;

    static ModelBundle init(const ModelConfig& config, data::Vocabulary vocab, std::uint64_t seed);

    EncoderParams& unimodal_encoder(Modality m) { return unimodal[static_cast<std::size_t>(m)]; }
    const EncoderParams& unimodal_encoder(Modality m) const { return unimodal[static_cast<std::size_t>(m)]; }

    /// Throws DimensionError when the parts do not fit together.
    void validate() const;

    friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// JSON document with a format_version field. Doubles round-trip exactly.
std::string serialize_checkpoint(const ModelBundle& bundle);
ModelBundle deserialize_checkpoint(const std::string& text);

/// Atomic write; throws NumericError if any parameter is non-finite.
void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_checkpoint(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the serialized checkpoint.
std::string checkpoint_id(const ModelBundle& bundle);

}  // namespace mmturn
