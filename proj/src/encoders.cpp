#include "mmturn/encoders.hpp"

#include <cmath>
#include <string>

#include "mmturn/core/error.hpp"

namespace mmturn {

namespace {

// a = W_in x + b + W_rec h_prev; h = tanh(a). `input_term` already holds W_in x.
void recurrent_step(const EncoderParams& p, std::span<const double> input_term, std::span<const double> h_prev,
                    std::span<double> h_out) {
    const std::size_t hw = p.hidden_width();
    for (std::size_t j = 0; j < hw; ++j) h_out[j] = input_term[j] + p.hidden_bias[j];
    if (!h_prev.empty()) matvec_add(p.recurrent, h_prev, h_out);
    for (std::size_t j = 0; j < hw; ++j) h_out[j] = std::tanh(h_out[j]);
}

void token_step(const EncoderParams& p, std::uint32_t token, std::span<const double> h_prev, std::span<double> h_out) {
    if (token >= p.input_proj.rows())
        throw DataError("text encoder: token id " + std::to_string(token) + " outside vocabulary of size " +
                        std::to_string(p.input_proj.rows()));
    recurrent_step(p, p.input_proj.row(token), h_prev, h_out);
}

void frame_step(const EncoderParams& p, std::span<const double> frame, std::span<const double> h_prev,
                std::span<double> h_out, std::span<double> scratch) {
    check_dim("frame encoder input", p.input_proj.cols(), frame.size());
    matvec(p.input_proj, frame, scratch);
    recurrent_step(p, scratch, h_prev, h_out);
}

Vector project(const EncoderParams& p, const Vector& readout) {
    Vector z(p.output_bias);
    matvec_add(p.output_proj, readout.span(), z.span());
    return z;
}

void require_modality(const EncoderParams& p, Modality expected, const char* input_kind) {
    if (p.modality != expected)
        throw UsageError(std::string("encode: ") + input_kind + " input given to " +
                         std::string(modality_name(p.modality)) + " encoder");
}

template <typename Frames>
EncoderForward encode_frames(const Frames& frames, const EncoderParams& p) {
    if (frames.empty()) throw DataError(std::string(modality_name(p.modality)) + " encoder: empty input");
    EncoderForward out;
    out.cache.hidden.reserve(frames.size());
    Vector scratch(p.hidden_width());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        Vector h(p.hidden_width());
        std::span<const double> prev = t == 0 ? std::span<const double>{} : out.cache.hidden.back().span();
        frame_step(p, frames[t].span(), prev, h.span(), scratch.span());
        out.cache.hidden.push_back(std::move(h));
    }
    out.cache.readout = temporal_average_pool(out.cache.hidden);
    out.feature = project(p, out.cache.readout);
    return out;
}

}  // namespace

EncoderParams EncoderParams::zeros(const EncoderConfig& cfg) {
    if (cfg.input_width == 0 || cfg.hidden_width == 0 || cfg.output_width == 0)
        throw UsageError("EncoderConfig: widths must be positive");
    EncoderParams p;
    p.modality = cfg.modality;
    if (cfg.modality == Modality::Text) p.input_proj = Matrix(cfg.input_width, cfg.hidden_width);
    else p.input_proj = Matrix(cfg.hidden_width, cfg.input_width);
    p.recurrent = Matrix(cfg.hidden_width, cfg.hidden_width);
    p.hidden_bias = Vector(cfg.hidden_width);
    p.output_proj = Matrix(cfg.output_width, cfg.hidden_width);
    p.output_bias = Vector(cfg.output_width);
    std::vector<std::size_t> sizes{cfg.output_width};
    sizes.insert(sizes.end(), cfg.head_hidden.begin(), cfg.head_hidden.end());
    sizes.push_back(3);
    p.head = MlpParams::zeros(sizes);
    return p;
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, Rng& rng) {
    EncoderParams p = zeros(cfg);
    if (cfg.modality == Modality::Text) {
        // embedding rows: fan-in is one-hot, so scale against the hidden width only
        const double a = std::sqrt(6.0 / static_cast<double>(1 + cfg.hidden_width));
        for (double& w : p.input_proj.span()) w = rng.uniform(-a, a);
    } else {
        glorot_fill(p.input_proj, rng);
    }
    glorot_fill(p.recurrent, rng);
    glorot_fill(p.output_proj, rng);
    for (auto& layer : p.head.layers) glorot_fill(layer.weight, rng);
    return p;
}

EncoderParams EncoderParams::zeros_like() const { return zeros(config()); }

EncoderConfig EncoderParams::config() const {
    EncoderConfig cfg;
    cfg.modality = modality;
    cfg.input_width = input_width();
    cfg.hidden_width = hidden_width();
    cfg.output_width = output_width();
    const auto sizes = head.sizes();
    cfg.head_hidden.assign(sizes.begin() + 1, sizes.end() - 1);
    return cfg;
}

std::size_t EncoderParams::input_width() const {
    return modality == Modality::Text ? input_proj.rows() : input_proj.cols();
}

void EncoderParams::collect_backbone(ParamRefs& refs) {
    refs.push_back(input_proj.span());
    refs.push_back(recurrent.span());
    refs.push_back(hidden_bias.span());
    refs.push_back(output_proj.span());
    refs.push_back(output_bias.span());
}

void EncoderParams::collect(ParamRefs& refs) {
    collect_backbone(refs);
    head.collect(refs);
}

Vector temporal_average_pool(std::span<const Vector> hidden_seq) {
    if (hidden_seq.empty()) throw DataError("temporal_average_pool: empty sequence");
    Vector sum(hidden_seq.front().size());
    for (const auto& h : hidden_seq) {
        check_dim("temporal_average_pool", sum.size(), h.size());
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += h[j];
    }
    const double count = static_cast<double>(hidden_seq.size());
    for (double& v : sum) v /= count;
    return sum;
}

EncoderForward encode_forward(const ModalInput& input, const EncoderParams& p) {
    return std::visit(
        [&](const auto& in) -> EncoderForward {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, PrecomputedFeature>) {
                check_dim("precomputed feature", p.output_width(), in.values.size());
                return {in.values, {}};
            } else if constexpr (std::is_same_v<T, TextInput>) {
                require_modality(p, Modality::Text, "text");
                if (in.tokens.empty()) throw DataError("text encoder: empty input");
                EncoderForward out;
                out.cache.hidden.reserve(in.tokens.size());
                for (std::size_t t = 0; t < in.tokens.size(); ++t) {
                    Vector h(p.hidden_width());
                    std::span<const double> prev =
                        t == 0 ? std::span<const double>{} : out.cache.hidden.back().span();
                    token_step(p, in.tokens[t], prev, h.span());
                    out.cache.hidden.push_back(std::move(h));
                }
                out.cache.readout = out.cache.hidden.back();
                out.feature = project(p, out.cache.readout);
                return out;
            } else if constexpr (std::is_same_v<T, AudioInput>) {
                require_modality(p, Modality::Audio, "audio");
                return encode_frames(in.frames, p);
            } else {
                require_modality(p, Modality::Video, "video");
                return encode_frames(in.frames, p);
            }
        },
        input);
}

Vector encode(const ModalInput& input, const EncoderParams& params) {
    return encode_forward(input, params).feature;
}

void encode_backward(const ModalInput& input, const EncoderParams& p, const EncoderCache& cache,
                     std::span<const double> grad_feature, EncoderParams& g) {
    if (std::holds_alternative<PrecomputedFeature>(input)) return;
    check_dim("encode_backward grad", p.output_width(), grad_feature.size());

    outer_add(g.output_proj, grad_feature, cache.readout.span());
    axpy(1.0, grad_feature, g.output_bias.span());
    Vector grad_readout(p.hidden_width());
    matvec_transposed_add(p.output_proj, grad_feature, grad_readout.span());

    const std::size_t steps = cache.hidden.size();
    const bool is_text = std::holds_alternative<TextInput>(input);
    const double pool_scale = is_text ? 0.0 : 1.0 / static_cast<double>(steps);

    const std::size_t hw = p.hidden_width();
    Vector dh_next(hw);
    Vector da(hw);
    for (std::size_t t = steps; t-- > 0;) {
        const Vector& h = cache.hidden[t];
        for (std::size_t j = 0; j < hw; ++j) {
            double dh = dh_next[j];
            if (is_text) {
                if (t + 1 == steps) dh += grad_readout[j];
            } else {
                dh += grad_readout[j] * pool_scale;
            }
            da[j] = dh * (1.0 - h[j] * h[j]);
        }
        axpy(1.0, da.span(), g.hidden_bias.span());
        if (is_text) {
            const auto token = std::get<TextInput>(input).tokens[t];
            axpy(1.0, da.span(), g.input_proj.row(token));
        } else {
            const auto& frames = std::holds_alternative<AudioInput>(input) ? std::get<AudioInput>(input).frames
                                                                           : std::get<VideoInput>(input).frames;
            outer_add(g.input_proj, da.span(), frames[t].span());
        }
        dh_next.fill(0.0);
        if (t > 0) {
            outer_add(g.recurrent, da.span(), cache.hidden[t - 1].span());
            matvec_transposed_add(p.recurrent, da.span(), dh_next.span());
        }
    }
}

VideoInput make_video_window(std::span<const Vector> available, std::size_t n) {
    VideoInput out;
    if (available.empty() || n == 0) return out;
    const std::size_t take = std::min(n, available.size());
    out.padded = n - take;
    out.frames.reserve(n);
    const std::size_t first = available.size() - take;
    for (std::size_t i = 0; i < out.padded; ++i) out.frames.push_back(available[first]);
    for (std::size_t i = first; i < available.size(); ++i) out.frames.push_back(available[i]);
    return out;
}

StreamingEncoderState::StreamingEncoderState(const EncoderParams& params)
    : params_(&params), hidden_(params.hidden_width()), sum_(params.hidden_width()) {}

void StreamingEncoderState::push_token(std::uint32_t token) {
    if (params_->modality != Modality::Text) throw UsageError("push_token on non-text encoder state");
    Vector h(params_->hidden_width());
    token_step(*params_, token, steps_ == 0 ? std::span<const double>{} : hidden_.span(), h.span());
    hidden_ = std::move(h);
    ++steps_;
}

void StreamingEncoderState::push_frame(std::span<const double> frame) {
    if (params_->modality == Modality::Text) throw UsageError("push_frame on text encoder state");
    Vector h(params_->hidden_width());
    Vector scratch(params_->hidden_width());
    frame_step(*params_, frame, steps_ == 0 ? std::span<const double>{} : hidden_.span(), h.span(), scratch.span());
    hidden_ = std::move(h);
    for (std::size_t j = 0; j < sum_.size(); ++j) sum_[j] += hidden_[j];
    ++steps_;
}

Vector StreamingEncoderState::feature() const {
    if (steps_ == 0) throw DataError("streaming encoder: no input yet");
    if (params_->modality == Modality::Text) return project(*params_, hidden_);
    Vector mean(sum_);
    const double count = static_cast<double>(steps_);
    for (double& v : mean) v /= count;
    return project(*params_, mean);
}

}  // namespace mmturn
