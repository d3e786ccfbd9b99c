#include "mmturn/data/synthetic.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/core/rng.hpp"
#include "mmturn/data/labeler.hpp"

namespace mmturn::data {

using json = nlohmann::ordered_json;

void SyntheticConfig::validate() const {
    double total = 0.0;
    for (double p : priors) {
        if (!(p >= 0.0)) throw UsageError("synthetic: priors must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("synthetic: priors must sum to 1");
    if (priors[0] >= 1.0) throw UsageError("synthetic: KEEP prior must be below 1 so utterances terminate");
    if (cue_tokens_per_class == 0) throw UsageError("synthetic: need at least one cue token per class");
    if (vocab_size <= kNumActions * cue_tokens_per_class)
        throw UsageError("synthetic: vocabulary must leave at least one neutral token");
    if (audio_width < kNumActions || video_width < kNumActions)
        throw UsageError("synthetic: feature widths must be at least 3 for orthogonal class means");
    if (!(noise_sigma > 0.0)) throw UsageError("synthetic: noise sigma must be positive");
    for (double q : cue_presence)
        if (!(q >= 0.0 && q <= 1.0)) throw UsageError("synthetic: cue presence must be in [0, 1]");
    if (min_word_frames == 0 || max_word_frames < min_word_frames)
        throw UsageError("synthetic: invalid word frame range");
    if (!(audio_hop > 0.0) || !(video_fps > 0.0)) throw UsageError("synthetic: audio hop and video fps must be positive");
    if (video_frames == 0 || utterances_per_conversation == 0) throw UsageError("synthetic: counts must be positive");
}

std::vector<std::string> SyntheticConfig::vocabulary() const {
    std::vector<std::string> bc_words;
    for (const auto& p : BackchannelVocabulary::default_phrases())
        if (p.find(' ') == std::string::npos) bc_words.push_back(p);

    std::vector<std::string> v;
    v.reserve(vocab_size);
    for (std::size_t j = 0; j < cue_tokens_per_class; ++j) v.push_back("keep" + std::to_string(j));
    for (std::size_t j = 0; j < cue_tokens_per_class; ++j) v.push_back("turn" + std::to_string(j));
    for (std::size_t j = 0; j < cue_tokens_per_class; ++j)
        v.push_back(j < bc_words.size() ? bc_words[j] : "bc" + std::to_string(j));
    for (std::size_t j = 0; j < neutral_token_count(); ++j) v.push_back("w" + std::to_string(j));
    return v;
}

std::optional<Action> SyntheticConfig::token_class(const std::string& token) const {
    const auto vocab = vocabulary();
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        if (vocab[i] != token) continue;
        if (i < kNumActions * cue_tokens_per_class) return static_cast<Action>(i / cue_tokens_per_class);
        return std::nullopt;
    }
    throw DataError("token '" + token + "' is not in the synthetic vocabulary");
}

Vector SyntheticConfig::class_mean(Action label, std::size_t width) const {
    Vector mu(width);
    mu[static_cast<std::size_t>(action_index(label))] = mean_scale;
    return mu;
}

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
    std::ostringstream s;
    s << prefix << std::setw(width) << std::setfill('0') << i;
    return s.str();
}

Vector signal(Rng& rng, bool cue, Action y, std::size_t width, const SyntheticConfig& cfg) {
    Vector x(width);
    for (std::size_t d = 0; d < width; ++d) x[d] = cfg.noise_sigma * rng.normal();
    if (cue) x[static_cast<std::size_t>(action_index(y))] += cfg.mean_scale;
    return x;
}

}  // namespace

SyntheticDataset gen_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    const auto vocab = cfg.vocabulary();
    const std::size_t cue_count = cfg.cue_tokens_per_class;
    const std::size_t neutral_base = kNumActions * cue_count;

    SyntheticDataset out;
    auto& header = out.manifest.header;
    header.audio_width = cfg.audio_width;
    header.video_width = cfg.video_width;
    header.video_frames = cfg.video_frames;
    header.audio_hop = cfg.audio_hop;

    Rng rng(cfg.seed);
    std::size_t total_words = 0;
    for (std::size_t c = 0; total_words < cfg.num_words; ++c) {
        Conversation conv;
        conv.conv_id = numbered("c", c, 5);
        conv.speakers = {conv.conv_id + "_a", conv.conv_id + "_b"};
        double t = 0.0;
        for (std::size_t u = 0; u < cfg.utterances_per_conversation && total_words < cfg.num_words; ++u) {
            Utterance utt;
            utt.conv_id = conv.conv_id;
            utt.utt_id = conv.conv_id + numbered("_u", u, 3);
            utt.speaker = conv.speakers[u % 2];
            std::vector<Vector> audio;
            std::vector<TimedFrame> video;

            constexpr std::size_t kMaxWords = 64;
            for (std::size_t i = 0;; ++i) {
                auto y = static_cast<Action>(rng.categorical(cfg.priors));
                if (i + 1 == kMaxWords && y == Action::Keep) {
                    const std::array<double, 2> tail{cfg.priors[1], cfg.priors[2]};
                    y = static_cast<Action>(1 + rng.categorical(tail));
                }
                LatentWord latent{utt.utt_id, i, y, {}};
                for (std::size_t k = 0; k < kNumModalities; ++k) latent.cue[k] = rng.bernoulli(cfg.cue_presence[k]);

                const std::size_t token =
                    latent.cue[0] ? static_cast<std::size_t>(action_index(y)) * cue_count + rng.uniform_int(cue_count)
                                  : neutral_base + rng.uniform_int(cfg.neutral_token_count());
                const Vector a = signal(rng, latent.cue[1], y, cfg.audio_width, cfg);
                const Vector v = signal(rng, latent.cue[2], y, cfg.video_width, cfg);

                const std::size_t frames =
                    cfg.min_word_frames + rng.uniform_int(cfg.max_word_frames - cfg.min_word_frames + 1);
                const double duration = static_cast<double>(frames) * cfg.audio_hop;
                WordFrame w{vocab[token], t, t + duration, utt.speaker, y};
                for (std::size_t f = 0; f < frames; ++f) audio.push_back(a);
                const auto video_count = static_cast<std::size_t>(std::llround(duration * cfg.video_fps));
                for (std::size_t f = 0; f < video_count; ++f)
                    video.push_back({t + (static_cast<double>(f) + 0.5) / cfg.video_fps, v});
                t = w.t_end;
                utt.words.push_back(std::move(w));
                out.hidden.push_back(latent);
                if (y != Action::Keep) break;
            }
            utt.audio_frames = std::move(audio);
            utt.video_frames = std::move(video);
            total_words += utt.words.size();
            // the other speaker either overlaps a backchannel or takes the turn after a pause
            if (utt.words.back().label == Action::Backchannel) t = utt.words.back().t_start + 0.5 * cfg.audio_hop;
            else t += 0.3;
            conv.utterances.push_back(std::move(utt));
        }
        out.manifest.conversations.push_back(std::move(conv));
    }
    return out;
}

void write_hidden_records(std::ostream& out, std::span<const LatentWord> hidden) {
    for (const auto& h : hidden) {
        json j = {{"utt_id", h.utt_id},
                  {"word_idx", h.word_idx},
                  {"label", std::string(action_name(h.label))},
                  {"cue", {{"T", h.cue[0]}, {"A", h.cue[1]}, {"V", h.cue[2]}}}};
        out << j.dump() << '\n';
    }
}

std::vector<LatentWord> read_hidden_records(std::istream& in) {
    std::vector<LatentWord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        try {
            const json j = json::parse(text);
            LatentWord h;
            h.utt_id = j.at("utt_id").get<std::string>();
            h.word_idx = j.at("word_idx").get<std::size_t>();
            const auto label = parse_action(j.at("label").get<std::string>());
            if (!label) throw DataError("bad label", line);
            h.label = *label;
            h.cue = {j.at("cue").at("T").get<bool>(), j.at("cue").at("A").get<bool>(), j.at("cue").at("V").get<bool>()};
            out.push_back(std::move(h));
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed hidden record: ") + e.what(), line);
        }
    }
    return out;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

using LogLik = std::array<double, kNumActions>;

LogLik text_loglik(const std::string& token, const SyntheticConfig& cfg) {
    const double q = cfg.cue_presence[0];
    const auto cls = cfg.token_class(token);
    LogLik ll{};
    for (std::size_t y = 0; y < kNumActions; ++y) {
        if (!cls) ll[y] = safe_log((1.0 - q) / static_cast<double>(cfg.neutral_token_count()));
        else if (static_cast<std::size_t>(action_index(*cls)) == y)
            ll[y] = safe_log(q / static_cast<double>(cfg.cue_tokens_per_class));
        else ll[y] = kNegInf;
    }
    return ll;
}

LogLik gaussian_loglik(const Vector& x, double q, const SyntheticConfig& cfg) {
    const double inv = 1.0 / (2.0 * cfg.noise_sigma * cfg.noise_sigma);
    double norm0 = 0.0;
    for (double v : x) norm0 += v * v;
    LogLik ll{};
    for (std::size_t y = 0; y < kNumActions; ++y) {
        // |x - mu_y|^2 with mu_y = scale * e_y
        const double d = x[y] - cfg.mean_scale;
        const double dist = norm0 - x[y] * x[y] + d * d;
        ll[y] = log_add(safe_log(q) - dist * inv, safe_log(1.0 - q) - norm0 * inv);
    }
    return ll;
}

const Vector& last_frame(const ModalInput& in) {
    if (const auto* a = std::get_if<AudioInput>(&in)) return a->frames.back();
    if (const auto* v = std::get_if<VideoInput>(&in)) return v->frames.back();
    throw DataError("bayes_oracle: expected raw audio/video frames");
}

}  // namespace

ActionDistribution bayes_oracle(const Sample& sample, const ModalityMask& mask, const SyntheticConfig& cfg) {
    LogLik lp{};
    for (std::size_t y = 0; y < kNumActions; ++y) lp[y] = safe_log(cfg.priors[y]);

    auto accumulate = [&](const LogLik& ll) {
        // a modality that rules out every class carries no usable evidence
        bool any = false;
        for (double v : ll) any = any || v != kNegInf;
        if (!any) return;
        for (std::size_t y = 0; y < kNumActions; ++y) lp[y] += ll[y];
    };

    const ModalityMask effective = mask.intersect(sample.available());
    if (effective.has(Modality::Text)) accumulate(text_loglik(sample.words.back(), cfg));
    if (effective.has(Modality::Audio))
        accumulate(gaussian_loglik(last_frame(*sample.input(Modality::Audio)), cfg.cue_presence[1], cfg));
    if (effective.has(Modality::Video))
        accumulate(gaussian_loglik(last_frame(*sample.input(Modality::Video)), cfg.cue_presence[2], cfg));

    double z = kNegInf;
    for (double v : lp) z = log_add(z, v);
    ActionDistribution d;
    if (z == kNegInf) {
        d.p = cfg.priors;
        return d;
    }
    for (std::size_t y = 0; y < kNumActions; ++y) d.p[y] = lp[y] == kNegInf ? 0.0 : std::exp(lp[y] - z);
    return d;
}

}  // namespace mmturn::data
