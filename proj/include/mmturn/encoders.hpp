#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmturn/core/linalg.hpp"
#include "mmturn/core/mlp.hpp"
#include "mmturn/core/params.hpp"
#include "mmturn/core/rng.hpp"
#include "mmturn/modality.hpp"

namespace mmturn {

inline constexpr std::size_t kDefaultFeatureWidth = 256;
inline constexpr std::size_t kDefaultVideoFrames = 16;

/// Vocabulary ids of the word prefix, most recent last.
struct TextInput {
    std::vector<std::uint32_t> tokens;
};

/// Framed acoustic features from utterance start through the current word.
struct AudioInput {
    std::vector<Vector> frames;
};

/// The last n video frames; `padded` leading entries are copies of the earliest real frame.
struct VideoInput {
    std::vector<Vector> frames;
    std::size_t padded = 0;
};

/// An externally computed backbone embedding, passed through unchanged.
struct PrecomputedFeature {
    Vector values;
};

using ModalInput = std::variant<TextInput, AudioInput, VideoInput, PrecomputedFeature>;

struct EncoderConfig {
    Modality modality = Modality::Text;
    /// Vocabulary size for text, per-frame feature width for audio/video.
    std::size_t input_width = 0;
    std::size_t hidden_width = 64;
    std::size_t output_width = kDefaultFeatureWidth;
    /// Hidden widths of the uni-modal head between output_width and the 3 logits.
    std::vector<std::size_t> head_hidden{64};
};

/// Recurrent toy backbone h_t = tanh(W_in x_t + W_rec h_{t-1} + b), read out as the last
/// state (text) or the temporal mean (audio/video), then projected linearly to z.
/// For text, W_in x_t is row `token` of the embedding table.
struct EncoderParams {
    Modality modality = Modality::Text;
    Matrix input_proj;   // text: vocab x hidden; audio/video: hidden x input_width
    Matrix recurrent;    // hidden x hidden
    Vector hidden_bias;  // hidden
    Matrix output_proj;  // output x hidden
    Vector output_bias;  // output
    MlpParams head;      // output -> ... -> 3, used by stage-1 training and uni-modal inference

    static EncoderParams init(const EncoderConfig& cfg, Rng& rng);
    static EncoderParams zeros(const EncoderConfig& cfg);
    EncoderParams zeros_like() const;
    EncoderConfig config() const;

    std::size_t input_width() const;
    std::size_t hidden_width() const { return recurrent.rows(); }
    std::size_t output_width() const { return output_proj.rows(); }

    /// Backbone and projection only.
    void collect_backbone(ParamRefs& refs);
    /// Backbone, projection and uni-modal head.
    void collect(ParamRefs& refs);

    friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

struct EncoderCache {
    std::vector<Vector> hidden;  // h_0 .. h_{T-1}
    Vector readout;              // last state or temporal mean
};

struct EncoderForward {
    Vector feature;
    EncoderCache cache;
};

/// Coordinate-wise arithmetic mean; accumulation runs in sequence order.
Vector temporal_average_pool(std::span<const Vector> hidden_seq);

Vector encode(const ModalInput& input, const EncoderParams& params);
EncoderForward encode_forward(const ModalInput& input, const EncoderParams& params);
/// Backpropagation through time; accumulates into the backbone fields of `grads`.
void encode_backward(const ModalInput& input, const EncoderParams& params, const EncoderCache& cache,
                     std::span<const double> grad_feature, EncoderParams& grads);

/// Pads or trims to exactly n frames ending at the most recent one. Returns an empty
/// frame list when `available` is empty.
VideoInput make_video_window(std::span<const Vector> available, std::size_t n);

/// Incremental state for streaming inference. Feeding steps one by one reproduces
/// encode() over the whole prefix bit for bit.
class StreamingEncoderState {
public:
    explicit StreamingEncoderState(const EncoderParams& params);

    void push_token(std::uint32_t token);
    void push_frame(std::span<const double> frame);
    std::size_t steps() const { return steps_; }
    Vector feature() const;

private:
    const EncoderParams* params_;
    Vector hidden_;
    Vector sum_;
    std::size_t steps_ = 0;
};

}  // namespace mmturn
