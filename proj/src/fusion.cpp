#include "mmturn/fusion.hpp"

#include <cmath>
#include <string>

#include "mmturn/core/error.hpp"
#include "mmturn/core/loss.hpp"

namespace mmturn {

FusionParams FusionParams::zeros(const FusionConfig& cfg) {
    if (cfg.rank == 0) throw UsageError("FusionConfig: rank must be at least 1");
    if (cfg.fused_width == 0) throw UsageError("FusionConfig: fused width must be positive");
    FusionParams p;
    p.rank = cfg.rank;
    p.fused_width = cfg.fused_width;
    for (std::size_t k = 0; k < kNumModalities; ++k) {
        if (cfg.feature_widths[k] == 0) throw UsageError("FusionConfig: feature widths must be positive");
        p.factors[k] = Matrix(cfg.rank * cfg.fused_width, cfg.feature_widths[k]);
    }
    std::vector<std::size_t> sizes{cfg.fused_width};
    sizes.insert(sizes.end(), cfg.head_hidden.begin(), cfg.head_hidden.end());
    sizes.push_back(kNumActions);
    p.head = MlpParams::zeros(sizes);
    return p;
}

FusionParams FusionParams::init(const FusionConfig& cfg, Rng& rng) {
    FusionParams p = zeros(cfg);
    for (std::size_t k = 0; k < kNumModalities; ++k) {
        // each rank factor is fused_width x d_k
        const double a = std::sqrt(6.0 / static_cast<double>(cfg.fused_width + cfg.feature_widths[k]));
        for (double& w : p.factors[k].span()) w = rng.uniform(-a, a);
    }
    for (auto& layer : p.head.layers) glorot_fill(layer.weight, rng);
    return p;
}

FusionParams FusionParams::zeros_like() const { return zeros(config()); }

FusionConfig FusionParams::config() const {
    FusionConfig cfg;
    cfg.rank = rank;
    cfg.fused_width = fused_width;
    for (std::size_t k = 0; k < kNumModalities; ++k) cfg.feature_widths[k] = factors[k].cols();
    const auto sizes = head.sizes();
    cfg.head_hidden.assign(sizes.begin() + 1, sizes.end() - 1);
    return cfg;
}

void FusionParams::validate() const {
    if (rank == 0) throw UsageError("FusionParams: rank must be at least 1");
    for (const auto& f : factors) check_dim("FusionParams factor rows", rank * fused_width, f.rows());
    head.validate();
    check_dim("FusionParams head input", fused_width, head.input_width());
    check_dim("FusionParams head output", kNumActions, head.output_width());
}

void FusionParams::collect_factors(ParamRefs& refs) {
    for (auto& f : factors) refs.push_back(f.span());
}

void FusionParams::collect(ParamRefs& refs) {
    collect_factors(refs);
    head.collect(refs);
}

Vector project_modality(const Vector& z, Modality m, const FusionParams& params, kernels::Exec exec) {
    const Matrix& w = params.stacked(m);
    check_dim((std::string("fuse: ") + std::string(modality_name(m)) + " feature").c_str(), w.cols(), z.size());
    Vector out(w.rows());
    kernels::rank_project(exec, w, z.span(), out.span());
    return out;
}

Vector combine_projections(const std::array<const Vector*, kNumModalities>& proj, std::size_t rank,
                           std::size_t fused_width) {
    for (const Vector* p : proj)
        if (p) check_dim("combine_projections", rank * fused_width, p->size());
    Vector h(fused_width);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t base = i * fused_width;
        for (std::size_t j = 0; j < fused_width; ++j) {
            const double t = proj[0] ? (*proj[0])[base + j] : 1.0;
            const double a = proj[1] ? (*proj[1])[base + j] : 1.0;
            const double v = proj[2] ? (*proj[2])[base + j] : 1.0;
            h[j] += t * a * v;
        }
    }
    return h;
}

namespace {
void check_mask(const FeatureSet& features, const ModalityMask& mask) {
    if (mask.empty()) throw UsageError("fuse: all modalities absent");
    for (Modality m : kAllModalities) {
        const bool present = features[static_cast<std::size_t>(m)].has_value();
        if (present != mask.has(m))
            throw UsageError(std::string("fuse: mask/feature mismatch for ") + std::string(modality_name(m)));
    }
}
}  // namespace

FuseForward fuse_forward(const FeatureSet& features, const ModalityMask& mask, const FusionParams& params,
                         kernels::Exec exec) {
    check_mask(features, mask);
    FuseForward out;
    out.cache.mask = mask;
    std::array<const Vector*, kNumModalities> views{};
    for (Modality m : kAllModalities) {
        const auto k = static_cast<std::size_t>(m);
        if (!mask.has(m)) continue;
        out.cache.projections[k] = project_modality(*features[k], m, params, exec);
        views[k] = &*out.cache.projections[k];
    }
    out.fused = combine_projections(views, params.rank, params.fused_width);
    return out;
}

Vector fuse(const FeatureSet& features, const ModalityMask& mask, const FusionParams& params, kernels::Exec exec) {
    return fuse_forward(features, mask, params, exec).fused;
}

void fuse_backward(const FeatureSet& features, const FusionParams& params, const FusionCache& cache,
                   std::span<const double> grad_fused, FusionParams& grads,
                   std::array<std::optional<Vector>, kNumModalities>& grad_features, kernels::Exec exec) {
    check_dim("fuse_backward grad", params.fused_width, grad_fused.size());
    const std::size_t width = params.fused_width;
    const std::size_t n = params.rank * width;
    for (Modality m : kAllModalities) {
        const auto k = static_cast<std::size_t>(m);
        grad_features[k].reset();
        if (!cache.mask.has(m)) continue;
        // dL/dt_k = g_h o (product of the other two terms)
        Vector g_proj(n);
        for (std::size_t idx = 0; idx < n; ++idx) {
            double other = 1.0;
            for (std::size_t o = 0; o < kNumModalities; ++o)
                if (o != k && cache.projections[o]) other *= (*cache.projections[o])[idx];
            g_proj[idx] = grad_fused[idx % width] * other;
        }
        Vector gz(params.feature_width(m));
        kernels::rank_project_backward(exec, params.stacked(m), features[k]->span(), g_proj.span(), grads.stacked(m),
                                       gz.span());
        grad_features[k] = std::move(gz);
    }
}

ActionDistribution predict(std::span<const double> fused, const FusionParams& params) {
    check_dim("predict", params.fused_width, fused.size());
    return softmax(mlp_forward(fused, params.head).logits.span());
}

FullFusionOracle reconstruct_full_weight(const FusionParams& params) {
    FullFusionOracle o;
    o.fused_width = params.fused_width;
    std::size_t entries = params.fused_width;
    for (Modality m : kAllModalities) {
        o.dims[static_cast<std::size_t>(m)] = params.feature_width(m);
        entries *= params.feature_width(m);
    }
    if (entries > FullFusionOracle::kMaxEntries)
        throw UsageError("reconstruct_full_weight: " + std::to_string(entries) + " entries exceeds limit of " +
                         std::to_string(FullFusionOracle::kMaxEntries));
    o.weight.assign(entries, 0.0);
    o.bias = Vector(params.fused_width);
    const auto [dt, da, dv] = o.dims;
    for (std::size_t h = 0; h < o.fused_width; ++h)
        for (std::size_t a = 0; a < dt; ++a)
            for (std::size_t b = 0; b < da; ++b)
                for (std::size_t c = 0; c < dv; ++c) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < params.rank; ++i)
                        s += params.factor(Modality::Text, i, h, a) * params.factor(Modality::Audio, i, h, b) *
                             params.factor(Modality::Video, i, h, c);
                    o.weight[((h * dt + a) * da + b) * dv + c] = s;
                }
    return o;
}

Vector fuse_via_full_tensor(const Vector& z_text, const Vector& z_audio, const Vector& z_video,
                            const FullFusionOracle& oracle) {
    check_dim("fuse_via_full_tensor text", oracle.dims[0], z_text.size());
    check_dim("fuse_via_full_tensor audio", oracle.dims[1], z_audio.size());
    check_dim("fuse_via_full_tensor video", oracle.dims[2], z_video.size());
    Vector h(oracle.bias);
    for (std::size_t j = 0; j < oracle.fused_width; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < oracle.dims[0]; ++a)
            for (std::size_t b = 0; b < oracle.dims[1]; ++b)
                for (std::size_t c = 0; c < oracle.dims[2]; ++c)
                    s += oracle.at(j, a, b, c) * z_text[a] * z_audio[b] * z_video[c];
        h[j] += s;
    }
    return h;
}

}  // namespace mmturn
