#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/core/gradcheck.hpp"
#include "mmturn/eval.hpp"
#include "mmturn/training.hpp"

using namespace mmturn;
using fixture::Small;

namespace {

// Short utterance prefixes keep the finite-difference checks cheap.
std::vector<data::Sample> short_samples(const Small& fx, std::size_t count) {
    std::vector<data::Sample> out;
    for (const auto& s : fx.samples)
        if (s.words.size() <= 3 && out.size() < count) out.push_back(s);
    return out;
}

}  // namespace

TEST_CASE("rmdt_sample") {
    Rng rng(5);
    SUBCASE("p = 0 never drops") {
        for (int i = 0; i < 1000; ++i) CHECK(rmdt_sample(rng, 0.0) == ModalityMask::full());
    }
    SUBCASE("p = 1 always drops exactly one modality") {
        for (int i = 0; i < 1000; ++i) CHECK(rmdt_sample(rng, 1.0).count() == 2);
    }
    SUBCASE("p = 0.3 drop rate and per-modality share") {
        const int n = 100000;
        std::array<int, 3> dropped{};
        int any = 0;
        for (int i = 0; i < n; ++i) {
            const auto m = rmdt_sample(rng, 0.3);
            if (m.count() == 3) continue;
            REQUIRE(m.count() == 2);
            ++any;
            for (Modality k : kAllModalities)
                if (!m.has(k)) ++dropped[static_cast<std::size_t>(k)];
        }
        CHECK(std::abs(any - 0.3 * n) <= 3 * std::sqrt(n * 0.3 * 0.7));
        for (int d : dropped) CHECK(std::abs(d - 0.1 * n) <= 3 * std::sqrt(n * 0.1 * 0.9));
    }
}

TEST_CASE("TrainConfig::validate") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = TrainConfig{};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = TrainConfig{};
    c.drop_probability = 1.0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = TrainConfig{};
    c.modalities = ModalityMask::none();
    CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("train_unimodal with zero epochs returns the initial parameters") {
    const Small fx(300, 1);
    const auto b = fx.bundle();
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto r = train_unimodal(fx.samples, Modality::Audio, b.unimodal_encoder(Modality::Audio), cfg);
    CHECK(r.params == b.unimodal_encoder(Modality::Audio));
    CHECK(r.trace.empty());
}

TEST_CASE("train_unimodal overfits a single sample") {
    const Small fx(300, 2);
    const auto b = fx.bundle();
    for (Modality m : kAllModalities) {
        const std::vector<data::Sample> one{fx.samples[3]};
        TrainConfig cfg;
        cfg.epochs = 300;
        cfg.learning_rate = 1e-2;
        const auto r = train_unimodal(one, m, b.unimodal_encoder(m), cfg);
        CHECK(unimodal_loss(r.params, one[0]) < 0.01);
    }
}

TEST_CASE("train_unimodal learns the text cues") {
    const Small train(3000, 11, 16);
    Small test(1000, 12, 16);
    auto b = train.bundle();
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.modalities = ModalityMask(true, false, false);
    train_unimodal_stage(b, train.samples, cfg);
    const auto rep = evaluate(b, test.samples, ModalityMask(true, false, false));
    // Text alone can reach 0.6 + 0.4 * 0.7 = 0.88 here; the majority class gives 0.7.
    CHECK(rep.accuracy >= 0.73);
}

TEST_CASE("train_unimodal rejects bad inputs") {
    const Small fx(200, 3);
    const auto b = fx.bundle();
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train_unimodal(fx.samples, Modality::Text, b.unimodal_encoder(Modality::Audio), cfg),
                    UsageError);
    auto no_audio = fx.samples;
    for (auto& s : no_audio) s.inputs[1].reset();
    CHECK_THROWS_AS(train_unimodal(no_audio, Modality::Audio, b.unimodal_encoder(Modality::Audio), cfg), DataError);
}

TEST_CASE("unimodal and joint losses match finite differences") {
    const Small fx(200, 4, 4);
    const auto b = fx.bundle();
    const auto samples = short_samples(fx, 3);
    for (const auto& s : samples) {
        for (Modality m : kAllModalities) {
            EncoderParams p = b.unimodal_encoder(m);
            EncoderParams g = p.zeros_like();
            unimodal_loss_grad(p, s, g);
            auto loss = [&](std::span<const double> v) {
                EncoderParams q = p;
                assign(refs_of(q), v);
                return unimodal_loss(q, s);
            };
            CHECK(finite_diff_check(loss, flatten(refs_of(p)), flatten(refs_of(g))).max_rel_error < 1e-4);
        }
        for (const auto& mask : ModalityMask::all_nonempty()) {
            JointModel p = b.joint;
            JointModel g = p.zeros_like();
            joint_loss_grad(p, s, mask, g);
            auto loss = [&](std::span<const double> v) {
                JointModel q = p;
                assign(refs_of(q), v);
                return joint_loss(q, s, mask);
            };
            CHECK(finite_diff_check(loss, flatten(refs_of(p)), flatten(refs_of(g))).max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("joint gradients reach only the encoders of present modalities") {
    const Small fx(200, 5, 4);
    const auto b = fx.bundle();
    const auto& s = fx.samples[2];
    for (const auto& mask : ModalityMask::all_nonempty()) {
        JointModel g = b.joint.zeros_like();
        joint_loss_grad(b.joint, s, mask, g);
        for (Modality m : kAllModalities) {
            EncoderParams& ge = g.encoder(m);
            ParamRefs refs;
            ge.collect_backbone(refs);
            const double norm = squared_norm(refs);
            if (mask.has(m)) CHECK(norm > 0.0);
            else CHECK(norm == 0.0);
            ParamRefs head;
            ge.head.collect(head);
            CHECK(squared_norm(head) == 0.0);
        }
    }
}

TEST_CASE("train_joint overfits a single sample") {
    const Small fx(300, 6);
    const auto b = fx.bundle();
    const std::vector<data::Sample> one{fx.samples[4]};
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.learning_rate = 1e-2;
    cfg.drop_probability = 0.0;
    const auto r = train_joint(one, b.joint, cfg);
    CHECK(joint_loss(r.model, one[0], ModalityMask::full()) < 0.01);
}

TEST_CASE("train_joint is reproducible and its losses are finite") {
    const Small fx(400, 7);
    const auto b = fx.bundle();
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 99;
    cfg.batch_size = 4;
    const auto a = train_joint(fx.samples, b.joint, cfg);
    const auto c = train_joint(fx.samples, b.joint, cfg);
    CHECK(a.model == c.model);
    REQUIRE(a.trace.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.trace[i].loss == c.trace[i].loss);
        CHECK(std::isfinite(a.trace[i].loss));
        CHECK(a.trace[i].samples == fx.samples.size());
    }
    CHECK(a.drops == c.drops);
    const std::size_t total = a.drops[0] + a.drops[1] + a.drops[2];
    const double steps = 2.0 * static_cast<double>(fx.samples.size());
    CHECK(std::abs(static_cast<double>(total) - 0.1 * steps) <= 4 * std::sqrt(steps * 0.09));

    cfg.seed = 100;
    CHECK_FALSE(train_joint(fx.samples, b.joint, cfg).model == a.model);
}

TEST_CASE("train_joint on a subset leaves the other encoders untouched") {
    const Small fx(300, 8);
    const auto b = fx.bundle();
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.modalities = ModalityMask(false, true, true);
    const auto r = train_joint(fx.samples, b.joint, cfg);
    CHECK(r.model.encoder(Modality::Text) == b.joint.encoder(Modality::Text));
    CHECK_FALSE(r.model.encoder(Modality::Audio) == b.joint.encoder(Modality::Audio));
    CHECK(r.drops == std::array<std::size_t, 3>{0, 0, 0});
}

TEST_CASE("stage functions record history and enforce ordering") {
    const Small fx(300, 9);
    auto b = fx.bundle();
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train_joint_stage(b, fx.samples, cfg), UsageError);

    std::vector<EpochMetrics> seen;
    train_unimodal_stage(b, fx.samples, cfg, [&](const EpochMetrics& m) { seen.push_back(m); });
    CHECK(seen.size() == 3);
    CHECK(b.unimodal_trained == std::array<bool, 3>{true, true, true});
    // Joint encoders start from the stage-1 backbones.
    train_joint_stage(b, fx.samples, cfg);
    CHECK(b.joint_trained);
    REQUIRE(b.history.size() == 4);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(b.history[k].stage == "unimodal");
        CHECK(b.history[k].modalities == ModalityMask::only(kAllModalities[k]).to_string());
    }
    CHECK(b.history[3].stage == "joint");
    CHECK(b.history[3].drop_probability == 0.1);

    auto scratch = fx.bundle();
    cfg.from_scratch = true;
    CHECK_NOTHROW(train_joint_stage(scratch, fx.samples, cfg));
    CHECK(scratch.history.back().from_scratch);
}

TEST_CASE("write_metrics emits one JSON object per epoch") {
    std::vector<EpochMetrics> ms(2);
    ms[0].epoch = 1;
    ms[0].stage = "unimodal";
    ms[0].modalities = "T";
    ms[0].loss = 0.5;
    ms[1].epoch = 2;
    std::stringstream out;
    write_metrics(out, ms);
    std::string line;
    std::getline(out, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["epoch"] == 1);
    CHECK(j["split"] == "train");
    CHECK(j["loss"] == 0.5);
    CHECK(j.contains("f1_bc"));
    std::getline(out, line);
    CHECK(nlohmann::json::parse(line)["epoch"] == 2);
}
