#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/encoders.hpp"
#include "mmturn/model.hpp"

namespace mmturn {

/// One word frame on the streaming input. Absent fields mean absent modalities.
struct StreamFrame {
    std::optional<std::string> token;
    std::vector<Vector> audio_frames;
    std::vector<Vector> video_frames;
    bool reset = false;

    bool has_input() const { return token.has_value() || !audio_frames.empty() || !video_frames.empty(); }
};

/// Parses {token?, audio_frame?, video_frame?, reset?}. audio_frame/video_frame may be a
/// single vector or a list of vectors. Throws DataError on malformed input.
StreamFrame parse_stream_frame(const std::string& line);

struct DecisionRule {
    /// When set, TURN (BC) needs its probability above the threshold; otherwise it needs to
    /// be the argmax. If both qualify the larger probability wins; if neither, KEEP.
    std::optional<double> tau_turn;
    std::optional<double> tau_bc;

    Action decide(const ActionDistribution& p) const;
};

struct StreamOutput {
    ActionDistribution probs;
    Action decision = Action::Keep;
    ModalityMask mask;
};

std::string format_stream_output(const StreamOutput& out);

/// Per-utterance context for `predict`. Incremental mode advances the text and audio
/// recurrences one step per input; replay mode re-encodes the stored prefix each frame.
/// Both produce identical probabilities.
class StreamingPredictor {
public:
    enum class Mode { Incremental, Replay };

    StreamingPredictor(const ModelBundle& model, DecisionRule rule, bool auto_reset, Mode mode = Mode::Incremental);

    /// Returns no output for a frame that only carries a reset.
    std::optional<StreamOutput> push(const StreamFrame& frame);
    void reset();

    std::size_t tokens_seen() const { return tokens_.size(); }

private:
    FeatureSet features(bool joint) const;

    const ModelBundle* model_;
    DecisionRule rule_;
    bool auto_reset_;
    Mode mode_;

    std::vector<std::uint32_t> tokens_;
    std::vector<Vector> audio_;
    std::deque<Vector> video_;
    // [0] stage-1 encoders, [1] joint encoders; text and audio only, video is windowed
    std::array<std::optional<StreamingEncoderState>, 2> text_state_;
    std::array<std::optional<StreamingEncoderState>, 2> audio_state_;
};

}  // namespace mmturn
