#include "mmturn/eval.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/core/loss.hpp"

namespace mmturn {

ActionDistribution infer_features(const ModelBundle& model, const FeatureSet& unimodal_features,
                                  const FeatureSet& joint_features, const ModalityMask& mask) {
    if (mask.empty()) throw DataError("inference needs at least one modality");
    if (mask.count() == 1) {
        const Modality m = mask.single();
        const auto& z = unimodal_features[static_cast<std::size_t>(m)];
        if (!z) throw DataError("missing uni-modal feature for " + std::string(modality_name(m)));
        const MlpForward head = mlp_forward(z->span(), model.unimodal_encoder(m).head);
        return softmax(head.logits.span());
    }
    return predict(fuse(joint_features, mask, model.joint.fusion).span(), model.joint.fusion);
}

Inference infer(const ModelBundle& model, const data::Sample& sample, const ModalityMask& mask) {
    const ModalityMask used = mask.intersect(sample.available());
    if (used.empty())
        throw DataError("sample " + sample.utt_id + "/" + std::to_string(sample.word_index) + " has none of " +
                        mask.to_string());
    FeatureSet uni;
    FeatureSet joint;
    for (Modality m : kAllModalities) {
        if (!used.has(m)) continue;
        const auto k = static_cast<std::size_t>(m);
        if (used.count() == 1) uni[k] = encode(*sample.input(m), model.unimodal[k]);
        else joint[k] = encode(*sample.input(m), model.joint.encoders[k]);
    }
    return {infer_features(model, uni, joint, used), used};
}

EvalReport report_from(const ConfusionMatrix& cm, const ModalityMask& mask) {
    EvalReport r;
    r.mask = mask;
    r.confusion = cm;
    r.accuracy = cm.accuracy();
    r.f1 = cm.f1_all();
    r.macro_f1 = cm.macro_f1();
    r.samples = static_cast<std::size_t>(cm.total());
    return r;
}

EvalReport evaluate(const ModelBundle& model, std::span<const data::Sample> samples, const ModalityMask& mask,
                    const std::string& checkpoint, kernels::Exec exec) {
    if (samples.empty()) throw DataError("evaluate: empty dataset");
    if (mask.empty()) throw UsageError("evaluate: empty modality mask");
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
    std::vector<Inference> out(samples.size());
    if (exec == kernels::Exec::Parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                out[static_cast<std::size_t>(i)] = infer(model, samples[static_cast<std::size_t>(i)], mask);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::size_t i = 0; i < samples.size(); ++i) out[i] = infer(model, samples[i], mask);
    }
    ConfusionMatrix cm;
    std::size_t reduced = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        cm.add(samples[i].label, out[i].probs.argmax());
        if (out[i].used != mask) ++reduced;
    }
    EvalReport r = report_from(cm, mask);
    r.reduced = reduced;
    r.checkpoint_id = checkpoint;
    return r;
}

EvalReport evaluate(const ModelBundle& model, std::span<const data::Sample> samples, const ModalityMask& mask,
                    kernels::Exec exec) {
    return evaluate(model, samples, mask, checkpoint_id(model), exec);
}

std::vector<EvalReport> run_ablation(const ModelBundle& model, std::span<const data::Sample> samples,
                                     std::span<const ModalityMask> combos, kernels::Exec exec) {
    if (combos.empty()) throw UsageError("ablation needs at least one modality combination");
    const std::string id = checkpoint_id(model);
    std::vector<EvalReport> reports;
    for (const auto& mask : combos) reports.push_back(evaluate(model, samples, mask, id, exec));
    return reports;
}

std::string format_table(std::span<const EvalReport> reports) {
    std::size_t name_width = 8;
    for (const auto& r : reports) name_width = std::max(name_width, r.mask.label().size());
    std::ostringstream s;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %7s  %7s  %7s  %8s  %7s\n", static_cast<int>(name_width), "Modality",
                  "Accuracy", "F1 Keep", "F1 Turn", "F1 BC", "Macro-F1", "N");
    s << buf;
    s << std::string(name_width + 60, '-') << '\n';
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %7.4f  %7.4f  %7.4f  %8.4f  %7zu\n", static_cast<int>(name_width),
                      r.mask.label().c_str(), r.accuracy, r.f1[0], r.f1[1], r.f1[2], r.macro_f1, r.samples);
        s << buf;
    }
    return s.str();
}

void write_reports(std::ostream& out, std::span<const EvalReport> reports) {
    for (const auto& r : reports) {
        nlohmann::ordered_json cm = nlohmann::ordered_json::array();
        for (const auto& row : r.confusion.counts) cm.push_back(row);
        const nlohmann::ordered_json j = {{"modalities", r.mask.to_string()},
                                          {"accuracy", r.accuracy},
                                          {"f1_keep", r.f1[0]},
                                          {"f1_turn", r.f1[1]},
                                          {"f1_bc", r.f1[2]},
                                          {"macro_f1", r.macro_f1},
                                          {"samples", r.samples},
                                          {"reduced", r.reduced},
                                          {"checkpoint", r.checkpoint_id},
                                          {"confusion", cm}};
        out << j.dump() << '\n';
    }
}

std::vector<ModalityMask> parse_combos(const std::string& text) {
    if (text == "all") return ModalityMask::all_nonempty();
    std::vector<ModalityMask> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const ModalityMask m = ModalityMask::parse(item);
        if (m.empty()) throw UsageError("empty modality combination in '" + text + "'");
        out.push_back(m);
    }
    if (out.empty()) throw UsageError("no modality combinations in '" + text + "'");
    return out;
}

}  // namespace mmturn
