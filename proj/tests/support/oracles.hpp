#pragma once

// Independent re-implementations used as test oracles. They share no code with the
// library beyond the plain data types.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mmturn/data/samples.hpp"
#include "mmturn/data/synthetic.hpp"
#include "mmturn/encoders.hpp"
#include "mmturn/fusion.hpp"

namespace oracle {

using mmturn::Matrix;
using mmturn::Vector;

inline std::vector<double> dense(const Matrix& m, const std::vector<double>& x, const Vector& b) {
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * x[c];
        out[r] = acc + b[r];
    }
    return out;
}

inline std::vector<double> mlp(const mmturn::MlpParams& p, std::vector<double> x) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        x = dense(p.layers[l].weight, x, p.layers[l].bias);
        if (l + 1 < p.layers.size())
            for (double& v : x) v = std::tanh(v);
    }
    return x;
}

inline std::array<double, 3> softmax(const std::vector<double>& z) {
    const double m = std::max({z[0], z[1], z[2]});
    std::array<double, 3> e{std::exp(z[0] - m), std::exp(z[1] - m), std::exp(z[2] - m)};
    const double s = e[0] + e[1] + e[2];
    return {e[0] / s, e[1] / s, e[2] / s};
}

/// Straight-line recurrence over per-step input terms; `mean` selects the readout.
inline std::vector<double> recur(const mmturn::EncoderParams& p, const std::vector<std::vector<double>>& inputs,
                                 bool mean) {
    const std::size_t H = p.recurrent.rows();
    std::vector<double> h(H, 0.0), sum(H, 0.0);
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        std::vector<double> next(H);
        for (std::size_t j = 0; j < H; ++j) {
            double a = inputs[t][j] + p.hidden_bias[j];
            if (t > 0)
                for (std::size_t k = 0; k < H; ++k) a += p.recurrent(j, k) * h[k];
            next[j] = std::tanh(a);
        }
        h = next;
        for (std::size_t j = 0; j < H; ++j) sum[j] += h[j];
    }
    std::vector<double> readout = h;
    if (mean)
        for (std::size_t j = 0; j < H; ++j) readout[j] = sum[j] / static_cast<double>(inputs.size());
    return dense(p.output_proj, readout, p.output_bias);
}

inline std::vector<double> encode_text(const mmturn::EncoderParams& p, const std::vector<std::uint32_t>& tokens) {
    std::vector<std::vector<double>> in;
    for (auto tok : tokens) {
        const auto row = p.input_proj.row(tok);
        in.emplace_back(row.begin(), row.end());
    }
    return recur(p, in, false);
}

inline std::vector<double> encode_frames(const mmturn::EncoderParams& p, const std::vector<Vector>& frames) {
    std::vector<std::vector<double>> in;
    const Vector zero(p.recurrent.rows());
    for (const auto& f : frames) in.push_back(dense(p.input_proj, f.values(), zero));
    return recur(p, in, true);
}

/// W[h][a][b][c] by direct summation over the rank index.
inline std::vector<double> full_weight(const mmturn::FusionParams& f) {
    using mmturn::Modality;
    const std::size_t H = f.fused_width;
    const std::size_t A = f.feature_width(Modality::Text), B = f.feature_width(Modality::Audio),
                      C = f.feature_width(Modality::Video);
    std::vector<double> w(H * A * B * C, 0.0);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t c = 0; c < C; ++c) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < f.rank; ++i)
                        acc += f.factor(Modality::Text, i, h, a) * f.factor(Modality::Audio, i, h, b) *
                               f.factor(Modality::Video, i, h, c);
                    w[((h * A + a) * B + b) * C + c] = acc;
                }
    return w;
}

/// Posterior by enumerating the three classes in probability space with the full
/// Gaussian normalising constants.
inline std::array<double, 3> bayes(const mmturn::data::Sample& s, const mmturn::ModalityMask& mask,
                                   const mmturn::data::SyntheticConfig& cfg) {
    using mmturn::Modality;
    std::array<double, 3> post = cfg.priors;
    const double sig2 = cfg.noise_sigma * cfg.noise_sigma;
    auto gauss = [&](const Vector& x, int cls) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double mu = static_cast<int>(i) == cls ? cfg.mean_scale : 0.0;
            d2 += (x[i] - mu) * (x[i] - mu);
        }
        return std::exp(-d2 / (2.0 * sig2)) / std::pow(2.0 * M_PI * sig2, 0.5 * static_cast<double>(x.size()));
    };
    if (mask.has(Modality::Text) && s.input(Modality::Text)) {
        const auto vocab = cfg.vocabulary();
        const std::string& tok = s.words.back();
        std::size_t idx = 0;
        while (vocab[idx] != tok) ++idx;
        const std::size_t C = cfg.cue_tokens_per_class;
        const double q = cfg.cue_presence[0];
        std::array<double, 3> lik{};
        for (int y = 0; y < 3; ++y) {
            if (idx >= 3 * C) lik[y] = (1.0 - q) / static_cast<double>(vocab.size() - 3 * C);
            else lik[y] = idx / C == static_cast<std::size_t>(y) ? q / static_cast<double>(C) : 0.0;
        }
        if (lik[0] + lik[1] + lik[2] > 0.0)
            for (int y = 0; y < 3; ++y) post[y] *= lik[y];
    }
    for (Modality m : {Modality::Audio, Modality::Video}) {
        const mmturn::ModalInput* in = s.input(m);
        if (!mask.has(m) || !in) continue;
        const Vector& x = m == Modality::Audio ? std::get<mmturn::AudioInput>(*in).frames.back()
                                               : std::get<mmturn::VideoInput>(*in).frames.back();
        const double q = cfg.cue_presence[static_cast<std::size_t>(m)];
        const double absent = gauss(x, -1);
        for (int y = 0; y < 3; ++y) post[y] *= q * gauss(x, y) + (1.0 - q) * absent;
    }
    const double z = post[0] + post[1] + post[2];
    for (double& p : post) p /= z;
    return post;
}

}  // namespace oracle
