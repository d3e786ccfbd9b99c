#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mmturn/core/action.hpp"
#include "mmturn/data/samples.hpp"
#include "mmturn/kernels.hpp"
#include "mmturn/metrics.hpp"
#include "mmturn/model.hpp"
#include "mmturn/modality.hpp"

namespace mmturn {

struct Inference {
    ActionDistribution probs;
    /// Requested mask restricted to the sample's modalities.
    ModalityMask used;
};

/// One modality routes through its stage-1 encoder and head; two or more go through the
/// joint encoders, fusion and fusion head. Throws DataError when no requested modality
/// is present in the sample.
Inference infer(const ModelBundle& model, const data::Sample& sample, const ModalityMask& mask);

/// Same routing on precomputed features (absent entries mean absent modalities).
ActionDistribution infer_features(const ModelBundle& model, const FeatureSet& unimodal_features,
                                  const FeatureSet& joint_features, const ModalityMask& mask);

struct EvalReport {
    ModalityMask mask;
    double accuracy = 0.0;
    std::array<double, kNumActions> f1{};
    double macro_f1 = 0.0;
    std::size_t samples = 0;
    /// Samples where part of the requested mask was missing from the data.
    std::size_t reduced = 0;
    std::string checkpoint_id;
    ConfusionMatrix confusion;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport report_from(const ConfusionMatrix& cm, const ModalityMask& mask);

/// Argmax decision per sample. Parallel execution fans out over samples; the confusion
/// matrix is filled afterwards in sample order, so both modes agree exactly.
EvalReport evaluate(const ModelBundle& model, std::span<const data::Sample> samples, const ModalityMask& mask,
                    kernels::Exec exec = kernels::Exec::Parallel);
EvalReport evaluate(const ModelBundle& model, std::span<const data::Sample> samples, const ModalityMask& mask,
                    const std::string& checkpoint, kernels::Exec exec = kernels::Exec::Parallel);

/// One report per combination from a single checkpoint.
std::vector<EvalReport> run_ablation(const ModelBundle& model, std::span<const data::Sample> samples,
                                     std::span<const ModalityMask> combos,
                                     kernels::Exec exec = kernels::Exec::Parallel);

/// Aligned plain-text table: Modality | Accuracy | F1 Keep | F1 Turn | F1 BC | Macro-F1.
std::string format_table(std::span<const EvalReport> reports);
/// One JSON object per report per line.
void write_reports(std::ostream& out, std::span<const EvalReport> reports);

/// "all" or a comma-separated list such as "T,TA,TAV".
std::vector<ModalityMask> parse_combos(const std::string& text);

}  // namespace mmturn
