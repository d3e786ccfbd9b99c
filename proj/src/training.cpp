#include "mmturn/training.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "mmturn/core/adam.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/core/loss.hpp"
#include "mmturn/metrics.hpp"

namespace mmturn {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning rate must be positive");
    if (batch_size == 0) throw UsageError("batch size must be at least 1");
    if (!(drop_probability >= 0.0 && drop_probability < 1.0))
        throw UsageError("drop probability must be in [0, 1)");
    if (modalities.empty()) throw UsageError("training needs at least one modality");
}

void write_metrics(std::ostream& out, std::span<const EpochMetrics> metrics) {
    for (const auto& m : metrics) {
        const nlohmann::ordered_json j = {{"epoch", m.epoch},
                                          {"split", m.split},
                                          {"stage", m.stage},
                                          {"modalities", m.modalities},
                                          {"loss", m.loss},
                                          {"accuracy", m.accuracy},
                                          {"f1_keep", m.f1[0]},
                                          {"f1_turn", m.f1[1]},
                                          {"f1_bc", m.f1[2]},
                                          {"samples", m.samples}};
        out << j.dump() << '\n';
    }
}

ModalityMask rmdt_sample(Rng& rng, double p) {
    ModalityMask mask = ModalityMask::full();
    if (rng.bernoulli(p)) mask.set(static_cast<Modality>(rng.uniform_int(kNumModalities)), false);
    return mask;
}

namespace {

struct StepResult {
    double loss = 0.0;
    Action predicted = Action::Keep;
};

const ModalInput& require_input(const data::Sample& s, Modality m) {
    const ModalInput* in = s.input(m);
    if (!in) throw DataError("sample " + s.utt_id + "/" + std::to_string(s.word_index) + " lacks modality " +
                             std::string(modality_name(m)));
    return *in;
}

StepResult unimodal_step(const EncoderParams& params, const data::Sample& sample, EncoderParams* grads) {
    const ModalInput& in = require_input(sample, params.modality);
    const EncoderForward enc = encode_forward(in, params);
    const MlpForward head = mlp_forward(enc.feature.span(), params.head);
    const CrossEntropy ce = softmax_cross_entropy(head.logits.span(), sample.label);
    if (grads) {
        const Vector gz = mlp_backward(params.head, head.cache, ce.grad_logits.span(), grads->head);
        encode_backward(in, params, enc.cache, gz.span(), *grads);
    }
    return {ce.loss, ce.probs.argmax()};
}

StepResult joint_step(const JointModel& model, const data::Sample& sample, const ModalityMask& mask,
                      JointModel* grads) {
    std::array<std::optional<EncoderForward>, kNumModalities> enc;
    FeatureSet features;
    for (Modality m : kAllModalities) {
        if (!mask.has(m)) continue;
        const auto k = static_cast<std::size_t>(m);
        enc[k] = encode_forward(require_input(sample, m), model.encoders[k]);
        features[k] = enc[k]->feature;
    }
    const FuseForward fused = fuse_forward(features, mask, model.fusion);
    const MlpForward head = mlp_forward(fused.fused.span(), model.fusion.head);
    const CrossEntropy ce = softmax_cross_entropy(head.logits.span(), sample.label);
    if (grads) {
        const Vector gh = mlp_backward(model.fusion.head, head.cache, ce.grad_logits.span(), grads->fusion.head);
        std::array<std::optional<Vector>, kNumModalities> gz;
        fuse_backward(features, model.fusion, fused.cache, gh.span(), grads->fusion, gz);
        for (Modality m : kAllModalities) {
            const auto k = static_cast<std::size_t>(m);
            if (!enc[k]) continue;
            encode_backward(*sample.input(m), model.encoders[k], enc[k]->cache, gz[k]->span(), grads->encoders[k]);
        }
    }
    return {ce.loss, ce.probs.argmax()};
}

void check_finite_loss(double loss, const char* stage) {
    if (!std::isfinite(loss)) throw NumericError(std::string(stage) + ": non-finite training loss");
}

/// Shuffled epochs with optional gradient accumulation over batch_size samples.
template <typename Step>
std::vector<EpochMetrics> run_epochs(std::size_t n, const TrainConfig& cfg, const ParamRefs& params,
                                     const ParamRefs& grads, const char* stage, const std::string& modalities,
                                     const MetricsSink& sink, Step&& step) {
    AdamState adam(AdamConfig{cfg.learning_rate});
    Rng order_rng = Rng(cfg.seed).split(1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<EpochMetrics> trace;
    const double scale = 1.0 / static_cast<double>(cfg.batch_size);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        order_rng.shuffle(std::span<std::size_t>(order));
        ConfusionMatrix cm;
        double total = 0.0;
        zero(grads);
        std::size_t pending = 0;
        for (std::size_t idx : order) {
            const auto [loss, label, predicted] = step(idx);
            check_finite_loss(loss, stage);
            total += loss;
            cm.add(label, predicted);
            if (++pending == cfg.batch_size) {
                if (cfg.batch_size > 1)
                    for (const auto& g : grads)
                        for (double& v : g) v *= scale;
                adam_step(params, grads, adam);
                zero(grads);
                pending = 0;
            }
        }
        if (pending > 0) {
            const double s = 1.0 / static_cast<double>(pending);
            if (pending > 1)
                for (const auto& g : grads)
                    for (double& v : g) v *= s;
            adam_step(params, grads, adam);
        }
        EpochMetrics m;
        m.epoch = epoch;
        m.stage = stage;
        m.modalities = modalities;
        m.loss = total / static_cast<double>(n);
        m.accuracy = cm.accuracy();
        m.f1 = cm.f1_all();
        m.samples = n;
        if (sink) sink(m);
        trace.push_back(std::move(m));
    }
    return trace;
}

struct Labeled {
    double loss;
    Action label;
    Action predicted;
};

}  // namespace

double unimodal_loss_grad(const EncoderParams& params, const data::Sample& sample, EncoderParams& grads) {
    return unimodal_step(params, sample, &grads).loss;
}

double unimodal_loss(const EncoderParams& params, const data::Sample& sample) {
    return unimodal_step(params, sample, nullptr).loss;
}

double joint_loss_grad(const JointModel& model, const data::Sample& sample, const ModalityMask& mask,
                       JointModel& grads) {
    return joint_step(model, sample, mask, &grads).loss;
}

double joint_loss(const JointModel& model, const data::Sample& sample, const ModalityMask& mask) {
    return joint_step(model, sample, mask, nullptr).loss;
}

UnimodalResult train_unimodal(std::span<const data::Sample> samples, Modality modality, EncoderParams init,
                              const TrainConfig& cfg, const MetricsSink& sink) {
    cfg.validate();
    if (init.modality != modality) throw UsageError("train_unimodal: encoder modality mismatch");
    std::vector<const data::Sample*> usable;
    UnimodalResult result;
    for (const auto& s : samples) {
        if (s.input(modality)) usable.push_back(&s);
        else ++result.skipped;
    }
    if (usable.empty())
        throw DataError("train_unimodal: no samples carry modality " + std::string(modality_name(modality)));

    result.params = std::move(init);
    EncoderParams grads = result.params.zeros_like();
    const ParamRefs prefs = refs_of(result.params);
    const ParamRefs grefs = refs_of(grads);
    const std::string label(1, modality_letter(modality));
    result.trace = run_epochs(usable.size(), cfg, prefs, grefs, "unimodal", label, sink, [&](std::size_t i) {
        const auto r = unimodal_step(result.params, *usable[i], &grads);
        return Labeled{r.loss, usable[i]->label, r.predicted};
    });
    return result;
}

JointResult train_joint(std::span<const data::Sample> samples, JointModel init, const TrainConfig& cfg,
                        const MetricsSink& sink) {
    cfg.validate();
    if (samples.empty()) throw DataError("train_joint: empty dataset");
    for (const auto& s : samples)
        if (cfg.modalities.intersect(s.available()).empty())
            throw DataError("train_joint: sample " + s.utt_id + "/" + std::to_string(s.word_index) +
                            " has none of the training modalities");

    JointResult result;
    result.model = std::move(init);
    JointModel grads = result.model.zeros_like();
    const ParamRefs prefs = refs_of(result.model);
    const ParamRefs grefs = refs_of(grads);
    Rng drop_rng = Rng(cfg.seed).split(2);
    const bool dropout = cfg.modalities == ModalityMask::full();

    result.trace = run_epochs(samples.size(), cfg, prefs, grefs, "joint", cfg.modalities.to_string(), sink,
                              [&](std::size_t i) {
                                  const data::Sample& s = samples[i];
                                  ModalityMask mask = cfg.modalities;
                                  if (dropout) {
                                      mask = rmdt_sample(drop_rng, cfg.drop_probability);
                                      if (mask.empty()) throw NumericError("RMDT produced an empty mask");
                                      for (Modality m : kAllModalities)
                                          if (!mask.has(m)) ++result.drops[static_cast<std::size_t>(m)];
                                  }
                                  ModalityMask step_mask = mask.intersect(s.available());
                                  // dropping the only modality a sample has would leave nothing to fuse
                                  if (step_mask.empty()) step_mask = cfg.modalities.intersect(s.available());
                                  const auto r = joint_step(result.model, s, step_mask, &grads);
                                  return Labeled{r.loss, s.label, r.predicted};
                              });
    return result;
}

void train_unimodal_stage(ModelBundle& bundle, std::span<const data::Sample> samples, const TrainConfig& cfg,
                          const MetricsSink& sink) {
    cfg.validate();
    for (Modality m : kAllModalities) {
        if (!cfg.modalities.has(m)) continue;
        const auto k = static_cast<std::size_t>(m);
        TrainConfig c = cfg;
        c.seed = Rng(cfg.seed).split(10 + k).next_u64();
        Rng init_rng = Rng(c.seed).split(0);
        EncoderParams init = EncoderParams::init(bundle.config.encoder_config(m, bundle.vocab.size()), init_rng);
        auto result = train_unimodal(samples, m, std::move(init), c, sink);
        bundle.unimodal[k] = std::move(result.params);
        bundle.unimodal_trained[k] = true;
        bundle.history.push_back({"unimodal", std::string(1, modality_letter(m)), cfg.epochs,
                                  samples.size() - result.skipped, cfg.learning_rate, 0.0, c.seed, false});
    }
    bundle.adam.learning_rate = cfg.learning_rate;
}

void train_joint_stage(ModelBundle& bundle, std::span<const data::Sample> samples, const TrainConfig& cfg,
                       const MetricsSink& sink) {
    cfg.validate();
    JointModel init;
    Rng root(cfg.seed);
    for (Modality m : kAllModalities) {
        const auto k = static_cast<std::size_t>(m);
        if (cfg.from_scratch) {
            Rng r = root.split(20 + k);
            init.encoders[k] = EncoderParams::init(bundle.config.encoder_config(m, bundle.vocab.size()), r);
        } else {
            if (cfg.modalities.has(m) && !bundle.unimodal_trained[k])
                throw UsageError("train-joint: stage-1 encoder for " + std::string(modality_name(m)) +
                                 " is untrained; run train-uni first or pass --from-scratch");
            init.encoders[k] = bundle.unimodal[k];
        }
    }
    Rng fusion_rng = root.split(30);
    init.fusion = FusionParams::init(bundle.config.fusion_config(), fusion_rng);

    auto result = train_joint(samples, std::move(init), cfg, sink);
    bundle.joint = std::move(result.model);
    bundle.joint_trained = true;
    bundle.adam.learning_rate = cfg.learning_rate;
    bundle.history.push_back({"joint", cfg.modalities.to_string(), cfg.epochs, samples.size(), cfg.learning_rate,
                              cfg.modalities == ModalityMask::full() ? cfg.drop_probability : 0.0, cfg.seed,
                              cfg.from_scratch});
}

}  // namespace mmturn
