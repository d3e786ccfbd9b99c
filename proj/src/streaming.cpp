#include "mmturn/streaming.hpp"

#include <cstdio>

#include "json.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/eval.hpp"

namespace mmturn {

using json = nlohmann::json;

namespace {

std::vector<Vector> frames_from(const json& j, const char* field) {
    if (!j.is_array() || j.empty()) throw DataError(std::string(field) + " must be a non-empty array");
    std::vector<Vector> out;
    if (j.front().is_array()) {
        for (const auto& f : j) out.emplace_back(f.get<std::vector<double>>());
    } else {
        out.emplace_back(j.get<std::vector<double>>());
    }
    for (const auto& f : out)
        if (!all_finite(f.span())) throw DataError(std::string(field) + " has non-finite values");
    return out;
}

}  // namespace

StreamFrame parse_stream_frame(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(std::string("stream record is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("stream record must be an object");
    StreamFrame f;
    try {
        if (j.contains("token") && !j["token"].is_null()) f.token = j["token"].get<std::string>();
        if (j.contains("audio_frame") && !j["audio_frame"].is_null())
            f.audio_frames = frames_from(j["audio_frame"], "audio_frame");
        if (j.contains("video_frame") && !j["video_frame"].is_null())
            f.video_frames = frames_from(j["video_frame"], "video_frame");
        if (j.contains("reset")) f.reset = j["reset"].get<bool>();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed stream record: ") + e.what());
    }
    if (!f.reset && !f.has_input()) throw DataError("stream record carries no modality and no reset");
    return f;
}

Action DecisionRule::decide(const ActionDistribution& p) const {
    if (!tau_turn && !tau_bc) return p.argmax();
    const Action top = p.argmax();
    const bool turn = tau_turn ? p.turn() > *tau_turn : top == Action::Turn;
    const bool bc = tau_bc ? p.backchannel() > *tau_bc : top == Action::Backchannel;
    if (turn && bc) return p.backchannel() > p.turn() ? Action::Backchannel : Action::Turn;
    if (turn) return Action::Turn;
    if (bc) return Action::Backchannel;
    return Action::Keep;
}

std::string format_stream_output(const StreamOutput& out) {
    nlohmann::ordered_json j = {{"p_keep", out.probs.keep()},
                                {"p_turn", out.probs.turn()},
                                {"p_bc", out.probs.backchannel()},
                                {"decision", std::string(action_name(out.decision))},
                                {"modalities", out.mask.to_string()}};
    return j.dump();
}

StreamingPredictor::StreamingPredictor(const ModelBundle& model, DecisionRule rule, bool auto_reset, Mode mode)
    : model_(&model), rule_(rule), auto_reset_(auto_reset), mode_(mode) {
    reset();
}

void StreamingPredictor::reset() {
    tokens_.clear();
    audio_.clear();
    video_.clear();
    const auto t = static_cast<std::size_t>(Modality::Text);
    const auto a = static_cast<std::size_t>(Modality::Audio);
    text_state_[0].emplace(model_->unimodal[t]);
    text_state_[1].emplace(model_->joint.encoders[t]);
    audio_state_[0].emplace(model_->unimodal[a]);
    audio_state_[1].emplace(model_->joint.encoders[a]);
}

FeatureSet StreamingPredictor::features(bool joint) const {
    const std::size_t which = joint ? 1 : 0;
    const auto& encoders = joint ? model_->joint.encoders : model_->unimodal;
    FeatureSet z;
    const auto t = static_cast<std::size_t>(Modality::Text);
    const auto a = static_cast<std::size_t>(Modality::Audio);
    const auto v = static_cast<std::size_t>(Modality::Video);
    if (!tokens_.empty()) {
        z[t] = mode_ == Mode::Incremental ? text_state_[which]->feature() : encode(TextInput{tokens_}, encoders[t]);
    }
    if (!audio_.empty()) {
        z[a] = mode_ == Mode::Incremental ? audio_state_[which]->feature() : encode(AudioInput{audio_}, encoders[a]);
    }
    if (!video_.empty()) {
        const std::vector<Vector> recent(video_.begin(), video_.end());
        z[v] = encode(make_video_window(recent, model_->config.video_frames), encoders[v]);
    }
    return z;
}

std::optional<StreamOutput> StreamingPredictor::push(const StreamFrame& frame) {
    if (frame.reset) reset();
    if (!frame.has_input()) return std::nullopt;

    ModalityMask mask;
    if (frame.token) {
        const std::uint32_t id = model_->vocab.id(*frame.token);
        tokens_.push_back(id);
        if (mode_ == Mode::Incremental)
            for (auto& s : text_state_) s->push_token(id);
        mask.set(Modality::Text, true);
    }
    for (const auto& f : frame.audio_frames) {
        check_dim("audio_frame", model_->config.audio_width, f.size());
        audio_.push_back(f);
        if (mode_ == Mode::Incremental)
            for (auto& s : audio_state_) s->push_frame(f.span());
        mask.set(Modality::Audio, true);
    }
    for (const auto& f : frame.video_frames) {
        check_dim("video_frame", model_->config.video_width, f.size());
        video_.push_back(f);
        if (video_.size() > model_->config.video_frames) video_.pop_front();
        mask.set(Modality::Video, true);
    }

    const bool joint = mask.count() > 1;
    const FeatureSet z = features(joint);
    FeatureSet masked;
    for (Modality m : kAllModalities)
        if (mask.has(m)) masked[static_cast<std::size_t>(m)] = z[static_cast<std::size_t>(m)];

    StreamOutput out;
    out.mask = mask;
    out.probs = joint ? infer_features(*model_, {}, masked, mask) : infer_features(*model_, masked, {}, mask);
    out.decision = rule_.decide(out.probs);
    if (auto_reset_ && out.decision == Action::Turn) reset();
    return out;
}

}  // namespace mmturn
