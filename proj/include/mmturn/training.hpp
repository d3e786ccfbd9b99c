#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/core/rng.hpp"
#include "mmturn/data/samples.hpp"
#include "mmturn/model.hpp"
#include "mmturn/modality.hpp"

namespace mmturn {

/// Suited to fine-tuning large pretrained backbones; the toy encoders here train from
/// scratch and use TrainConfig::learning_rate instead.
inline constexpr double kFineTuneLearningRate = 1e-5;

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 20;
    std::size_t batch_size = 1;
    /// RMDT: probability of dropping one modality per step.
    double drop_probability = 0.1;
    std::uint64_t seed = 0;
    ModalityMask modalities = ModalityMask::full();
    /// Stage 2 without stage-1 initialisation of the joint encoders.
    bool from_scratch = false;

    /// Throws UsageError on out-of-range values.
    void validate() const;
};

/// Per-class counts of one pass, filled from the predictions made while training.
struct EpochMetrics {
    std::size_t epoch = 0;
    std::string split = "train";
    std::string stage;
    std::string modalities;
    double loss = 0.0;
    double accuracy = 0.0;
    std::array<double, kNumActions> f1{};
    std::size_t samples = 0;
};

/// One JSON object per line.
void write_metrics(std::ostream& out, std::span<const EpochMetrics> metrics);

using MetricsSink = std::function<void(const EpochMetrics&)>;

/// With probability p one modality, chosen uniformly, is absent; otherwise the full mask.
ModalityMask rmdt_sample(Rng& rng, double p);

/// Cross-entropy of encoder -> uni-modal head on one sample; accumulates into `grads`.
double unimodal_loss_grad(const EncoderParams& params, const data::Sample& sample, EncoderParams& grads);
double unimodal_loss(const EncoderParams& params, const data::Sample& sample);

/// Cross-entropy of encoders -> fusion -> head on one sample under `mask`; accumulates
/// into `grads` (encoder heads untouched).
double joint_loss_grad(const JointModel& model, const data::Sample& sample, const ModalityMask& mask,
                       JointModel& grads);
double joint_loss(const JointModel& model, const data::Sample& sample, const ModalityMask& mask);

struct UnimodalResult {
    EncoderParams params;
    std::vector<EpochMetrics> trace;
    /// Samples without the modality, skipped.
    std::size_t skipped = 0;
};

/// Stage 1 for one modality. Samples are shuffled each epoch with the seeded RNG.
UnimodalResult train_unimodal(std::span<const data::Sample> samples, Modality modality, EncoderParams init,
                              const TrainConfig& cfg, const MetricsSink& sink = {});

struct JointResult {
    JointModel model;
    std::vector<EpochMetrics> trace;
    /// Modality drops made by RMDT, per modality.
    std::array<std::size_t, kNumModalities> drops{};
};

/// Stage 2 with RMDT. The drop is applied only when training on all three modalities; the
/// step mask is then intersected with the sample's available modalities.
JointResult train_joint(std::span<const data::Sample> samples, JointModel init, const TrainConfig& cfg,
                        const MetricsSink& sink = {});

/// Stage 1 on every modality in cfg.modalities, recorded in the bundle.
void train_unimodal_stage(ModelBundle& bundle, std::span<const data::Sample> samples, const TrainConfig& cfg,
                          const MetricsSink& sink = {});
/// Stage 2: initialises the joint encoders from stage 1 (unless from_scratch), trains, records.
void train_joint_stage(ModelBundle& bundle, std::span<const data::Sample> samples, const TrainConfig& cfg,
                       const MetricsSink& sink = {});

}  // namespace mmturn
