#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/training.hpp"

using namespace mmturn;
using fixture::Small;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mmturn_model_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("ModelBundle::init wires stage-1 copies into the joint model") {
    const Small fx(100, 1);
    const auto b = fx.bundle(5);
    CHECK_NOTHROW(b.validate());
    for (std::size_t k = 0; k < 3; ++k) CHECK(b.joint.encoders[k] == b.unimodal[k]);
    CHECK(b.unimodal_trained == std::array<bool, 3>{false, false, false});
    CHECK_FALSE(b.joint_trained);
    CHECK(fx.bundle(5) == b);
    CHECK_FALSE(fx.bundle(6) == b);
    CHECK(b.unimodal_encoder(Modality::Text).input_width() == fx.vocab.size());
    CHECK(b.unimodal_encoder(Modality::Audio).input_width() == 16);
}

TEST_CASE("checkpoints round-trip exactly") {
    const Small fx(300, 2);
    auto b = fx.bundle();
    TrainConfig cfg;
    cfg.epochs = 1;
    train_unimodal_stage(b, fx.samples, cfg);
    train_joint_stage(b, fx.samples, cfg);

    const std::string text = serialize_checkpoint(b);
    const ModelBundle back = deserialize_checkpoint(text);
    CHECK(back == b);
    CHECK(serialize_checkpoint(back) == text);
    CHECK(checkpoint_id(back) == checkpoint_id(b));
    CHECK(checkpoint_id(b).size() == 16);

    const auto dir = scratch_dir("roundtrip");
    save_checkpoint(dir / "m.json", b);
    CHECK(load_checkpoint(dir / "m.json") == b);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint_id changes with any parameter") {
    const Small fx(100, 3);
    auto b = fx.bundle();
    const auto id = checkpoint_id(b);
    b.joint.fusion.factor(Modality::Video, 1, 0, 0) += 1e-12;
    CHECK(checkpoint_id(b) != id);
}

TEST_CASE("deserialize_checkpoint rejects bad documents") {
    const Small fx(100, 4);
    const auto b = fx.bundle();
    auto doc = nlohmann::json::parse(serialize_checkpoint(b));

    CHECK_THROWS_AS(deserialize_checkpoint("not json"), DataError);
    auto v = doc;
    v["format_version"] = kCheckpointFormatVersion + 1;
    CHECK_THROWS_AS(deserialize_checkpoint(v.dump()), DataError);
    auto missing = doc;
    missing.erase("joint");
    CHECK_THROWS_AS(deserialize_checkpoint(missing.dump()), DataError);
    auto wide = doc;
    wide["config"]["feature_width"] = 9;
    CHECK_THROWS_AS(deserialize_checkpoint(wide.dump()), DimensionError);
}

TEST_CASE("save_checkpoint refuses non-finite parameters") {
    const Small fx(100, 5);
    auto b = fx.bundle();
    b.unimodal[1].hidden_bias[0] = std::numeric_limits<double>::quiet_NaN();
    const auto dir = scratch_dir("nan");
    CHECK_THROWS_AS(save_checkpoint(dir / "m.json", b), NumericError);
    CHECK_FALSE(std::filesystem::exists(dir / "m.json"));
    std::filesystem::remove_all(dir);
}
