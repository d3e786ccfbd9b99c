#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/core/linalg.hpp"
#include "mmturn/core/mlp.hpp"
#include "mmturn/core/params.hpp"
#include "mmturn/core/rng.hpp"
#include "mmturn/kernels.hpp"
#include "mmturn/modality.hpp"

namespace mmturn {

struct FusionConfig {
    std::size_t rank = 16;
    std::size_t fused_width = 256;
    std::array<std::size_t, kNumModalities> feature_widths{256, 256, 256};
    std::vector<std::size_t> head_hidden{64};
};

/// Low-rank multi-modal fusion with modality selection.
///
/// For each modality k and rank index i there is a factor w_k^(i) of shape
/// fused_width x d_k. The fused feature is
///
///     h = sum_i  t_T^(i) o t_A^(i) o t_V^(i),    t_k^(i) = w_k^(i) z_k,
///
/// where o is the element-wise product and t_k^(i) is the all-ones vector when
/// modality k is absent. This is exactly W . (z_T (x) z_A (x) z_V) for the rank-r
/// tensor W = sum_i w_T^(i) (x) w_A^(i) (x) w_V^(i) sharing the output index.
///
/// The factors of modality k are stored stacked: row i * fused_width + j of
/// `factors[k]` is row j of w_k^(i).
struct FusionParams {
    std::size_t rank = 0;
    std::size_t fused_width = 0;
    std::array<Matrix, kNumModalities> factors;
    MlpParams head;

    static FusionParams init(const FusionConfig& cfg, Rng& rng);
    static FusionParams zeros(const FusionConfig& cfg);
    FusionParams zeros_like() const;
    FusionConfig config() const;

    std::size_t feature_width(Modality m) const { return factors[static_cast<std::size_t>(m)].cols(); }
    Matrix& stacked(Modality m) { return factors[static_cast<std::size_t>(m)]; }
    const Matrix& stacked(Modality m) const { return factors[static_cast<std::size_t>(m)]; }
    /// w_k^(i)[row, col]
    double factor(Modality m, std::size_t i, std::size_t row, std::size_t col) const {
        return stacked(m)(i * fused_width + row, col);
    }
    double& factor(Modality m, std::size_t i, std::size_t row, std::size_t col) {
        return stacked(m)(i * fused_width + row, col);
    }

    void validate() const;
    void collect_factors(ParamRefs& refs);
    void collect(ParamRefs& refs);

    friend bool operator==(const FusionParams&, const FusionParams&) = default;
};

/// Features indexed by Modality; absent entries are not stored.
using FeatureSet = std::array<std::optional<Vector>, kNumModalities>;

struct FusionCache {
    ModalityMask mask;
    /// Per-modality projections t_k (rank * fused_width values), present modalities only.
    std::array<std::optional<Vector>, kNumModalities> projections;
};

struct FuseForward {
    Vector fused;
    FusionCache cache;
};

/// Per-rank projections of one modality: rank * fused_width values.
Vector project_modality(const Vector& z, Modality m, const FusionParams& params,
                        kernels::Exec exec = kernels::Exec::Serial);

/// Combines projections in the fixed order T, A, V; a null entry stands for the ones vector.
Vector combine_projections(const std::array<const Vector*, kNumModalities>& projections, std::size_t rank,
                           std::size_t fused_width);

Vector fuse(const FeatureSet& features, const ModalityMask& mask, const FusionParams& params,
            kernels::Exec exec = kernels::Exec::Serial);
FuseForward fuse_forward(const FeatureSet& features, const ModalityMask& mask, const FusionParams& params,
                         kernels::Exec exec = kernels::Exec::Serial);

/// Accumulates factor gradients into `grads` and writes dL/dz_k for present modalities.
void fuse_backward(const FeatureSet& features, const FusionParams& params, const FusionCache& cache,
                   std::span<const double> grad_fused, FusionParams& grads,
                   std::array<std::optional<Vector>, kNumModalities>& grad_features,
                   kernels::Exec exec = kernels::Exec::Serial);

/// softmax(head(h)).
ActionDistribution predict(std::span<const double> fused, const FusionParams& params);

/// Dense weight tensor of the general form h = W . Z + b, for small dimensions only.
struct FullFusionOracle {
    static constexpr std::size_t kMaxEntries = 1'000'000;

    std::size_t fused_width = 0;
    std::array<std::size_t, kNumModalities> dims{};
    std::vector<double> weight;  // [h][a][b][c], row-major
    Vector bias;

    double at(std::size_t h, std::size_t a, std::size_t b, std::size_t c) const {
        return weight[((h * dims[0] + a) * dims[1] + b) * dims[2] + c];
    }
};

/// W[h,a,b,c] = sum_i w_T^(i)[h,a] w_A^(i)[h,b] w_V^(i)[h,c]; bias zero.
FullFusionOracle reconstruct_full_weight(const FusionParams& params);

/// h[j] = sum_{a,b,c} W[j,a,b,c] z_T[a] z_A[b] z_V[c] + b[j]. Tri-modal only.
Vector fuse_via_full_tensor(const Vector& z_text, const Vector& z_audio, const Vector& z_video,
                            const FullFusionOracle& oracle);

}  // namespace mmturn
