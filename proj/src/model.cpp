#include "mmturn/model.hpp"

#include <cstdio>

#include "json.hpp"
#include "mmturn/core/error.hpp"
#include "mmturn/io.hpp"

namespace mmturn {

using json = nlohmann::ordered_json;

EncoderConfig ModelConfig::encoder_config(Modality m, std::size_t vocab_size) const {
    EncoderConfig c;
    c.modality = m;
    c.input_width = m == Modality::Text ? vocab_size : m == Modality::Audio ? audio_width : video_width;
    c.hidden_width = encoder_hidden;
    c.output_width = feature_width;
    c.head_hidden = head_hidden;
    return c;
}

FusionConfig ModelConfig::fusion_config() const {
    FusionConfig c;
    c.rank = rank;
    c.fused_width = fused_width;
    c.feature_widths = {feature_width, feature_width, feature_width};
    c.head_hidden = fusion_head_hidden;
    return c;
}

JointModel JointModel::zeros_like() const {
    JointModel z;
    for (std::size_t k = 0; k < kNumModalities; ++k) z.encoders[k] = encoders[k].zeros_like();
    z.fusion = fusion.zeros_like();
    return z;
}

void JointModel::collect(ParamRefs& refs) {
    for (auto& e : encoders) e.collect_backbone(refs);
    fusion.collect(refs);
}

ModelBundle ModelBundle::init(const ModelConfig& config, data::Vocabulary vocab, std::uint64_t seed) {
    ModelBundle b;
    b.config = config;
    b.vocab = std::move(vocab);
    const Rng root(seed);
    for (Modality m : kAllModalities) {
        const auto k = static_cast<std::size_t>(m);
        Rng r = root.split(k);
        b.unimodal[k] = EncoderParams::init(config.encoder_config(m, b.vocab.size()), r);
        // stage 2 starts from the stage-1 encoders; until then it holds the same init
        b.joint.encoders[k] = b.unimodal[k];
    }
    Rng fr = root.split(kNumModalities);
    b.joint.fusion = FusionParams::init(config.fusion_config(), fr);
    return b;
}

void ModelBundle::validate() const {
    for (Modality m : kAllModalities) {
        const auto k = static_cast<std::size_t>(m);
        const EncoderConfig expect = config.encoder_config(m, vocab.size());
        for (const EncoderParams* e : {&unimodal[k], &joint.encoders[k]}) {
            check_dim("checkpoint encoder input", expect.input_width, e->input_width());
            check_dim("checkpoint encoder hidden", expect.hidden_width, e->hidden_width());
            check_dim("checkpoint encoder output", expect.output_width, e->output_width());
            e->head.validate();
        }
        check_dim("checkpoint fusion feature", config.feature_width, joint.fusion.feature_width(m));
    }
    joint.fusion.validate();
    check_dim("checkpoint fusion width", config.fused_width, joint.fusion.fused_width);
    check_dim("checkpoint fusion rank", config.rank, joint.fusion.rank);
}

namespace {

json to_json(const Vector& v) { return v.values(); }

json to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.span().begin(), m.span().end())}};
}

json to_json(const MlpParams& p) {
    json layers = json::array();
    for (const auto& l : p.layers) layers.push_back({{"weight", to_json(l.weight)}, {"bias", to_json(l.bias)}});
    return layers;
}

json to_json(const EncoderParams& e) {
    return {{"modality", std::string(1, modality_letter(e.modality))},
            {"input_proj", to_json(e.input_proj)},
            {"recurrent", to_json(e.recurrent)},
            {"hidden_bias", to_json(e.hidden_bias)},
            {"output_proj", to_json(e.output_proj)},
            {"output_bias", to_json(e.output_bias)},
            {"head", to_json(e.head)}};
}

json to_json(const FusionParams& f) {
    json factors = json::array();
    for (const auto& m : f.factors) factors.push_back(to_json(m));
    return {{"rank", f.rank}, {"fused_width", f.fused_width}, {"factors", factors}, {"head", to_json(f.head)}};
}

json to_json(const ModelConfig& c) {
    return {{"audio_width", c.audio_width},       {"video_width", c.video_width},
            {"encoder_hidden", c.encoder_hidden}, {"feature_width", c.feature_width},
            {"head_hidden", c.head_hidden},       {"rank", c.rank},
            {"fused_width", c.fused_width},       {"fusion_head_hidden", c.fusion_head_hidden},
            {"video_frames", c.video_frames},     {"audio_hop", c.audio_hop}};
}

json to_json(const StageRecord& s) {
    return {{"stage", s.stage},
            {"modalities", s.modalities},
            {"epochs", s.epochs},
            {"samples", s.samples},
            {"learning_rate", s.learning_rate},
            {"drop_probability", s.drop_probability},
            {"seed", s.seed},
            {"from_scratch", s.from_scratch}};
}

Vector vector_from(const json& j) { return Vector(j.get<std::vector<double>>()); }

Matrix matrix_from(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

MlpParams mlp_from(const json& j) {
    MlpParams p;
    for (const auto& l : j) p.layers.push_back({matrix_from(l.at("weight")), vector_from(l.at("bias"))});
    p.validate();
    return p;
}

EncoderParams encoder_from(const json& j) {
    EncoderParams e;
    e.modality = parse_modality(j.at("modality").get<std::string>());
    e.input_proj = matrix_from(j.at("input_proj"));
    e.recurrent = matrix_from(j.at("recurrent"));
    e.hidden_bias = vector_from(j.at("hidden_bias"));
    e.output_proj = matrix_from(j.at("output_proj"));
    e.output_bias = vector_from(j.at("output_bias"));
    e.head = mlp_from(j.at("head"));
    return e;
}

FusionParams fusion_from(const json& j) {
    FusionParams f;
    f.rank = j.at("rank").get<std::size_t>();
    f.fused_width = j.at("fused_width").get<std::size_t>();
    const auto& factors = j.at("factors");
    if (factors.size() != kNumModalities) throw DataError("checkpoint: expected three factor stacks");
    for (std::size_t k = 0; k < kNumModalities; ++k) f.factors[k] = matrix_from(factors[k]);
    f.head = mlp_from(j.at("head"));
    return f;
}

ModelConfig config_from(const json& j) {
    ModelConfig c;
    c.audio_width = j.at("audio_width").get<std::size_t>();
    c.video_width = j.at("video_width").get<std::size_t>();
    c.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    c.feature_width = j.at("feature_width").get<std::size_t>();
    c.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
    c.rank = j.at("rank").get<std::size_t>();
    c.fused_width = j.at("fused_width").get<std::size_t>();
    c.fusion_head_hidden = j.at("fusion_head_hidden").get<std::vector<std::size_t>>();
    c.video_frames = j.at("video_frames").get<std::size_t>();
    c.audio_hop = j.at("audio_hop").get<double>();
    return c;
}

StageRecord stage_from(const json& j) {
    StageRecord s;
    s.stage = j.at("stage").get<std::string>();
    s.modalities = j.at("modalities").get<std::string>();
    s.epochs = j.at("epochs").get<std::size_t>();
    s.samples = j.at("samples").get<std::size_t>();
    s.learning_rate = j.at("learning_rate").get<double>();
    s.drop_probability = j.at("drop_probability").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.from_scratch = j.at("from_scratch").get<bool>();
    return s;
}

bool bundle_finite(const ModelBundle& b) {
    auto copy = b;
    ParamRefs refs;
    for (auto& e : copy.unimodal) e.collect(refs);
    copy.joint.collect(refs);
    for (auto& e : copy.joint.encoders) e.head.collect(refs);
    for (const auto& r : refs)
        if (!all_finite(r)) return false;
    return true;
}

}  // namespace

std::string serialize_checkpoint(const ModelBundle& b) {
    json unimodal = json::array();
    json encoders = json::array();
    for (std::size_t k = 0; k < kNumModalities; ++k) {
        unimodal.push_back(to_json(b.unimodal[k]));
        encoders.push_back(to_json(b.joint.encoders[k]));
    }
    json history = json::array();
    for (const auto& s : b.history) history.push_back(to_json(s));
    std::vector<std::string> words(b.vocab.words().begin() + 1, b.vocab.words().end());
    const json doc = {
        {"format_version", kCheckpointFormatVersion},
        {"config", to_json(b.config)},
        {"adam",
         {{"learning_rate", b.adam.learning_rate},
          {"beta1", b.adam.beta1},
          {"beta2", b.adam.beta2},
          {"epsilon", b.adam.epsilon}}},
        {"stages", {{"unimodal", b.unimodal_trained}, {"joint", b.joint_trained}}},
        {"history", history},
        {"vocabulary", words},
        {"unimodal", unimodal},
        {"joint", {{"encoders", encoders}, {"fusion", to_json(b.joint.fusion)}}},
    };
    return doc.dump() + "\n";
}

ModelBundle deserialize_checkpoint(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion)
            throw DataError("unsupported checkpoint format_version " + std::to_string(version));
        ModelBundle b;
        b.config = config_from(doc.at("config"));
        const auto& adam = doc.at("adam");
        b.adam = {adam.at("learning_rate").get<double>(), adam.at("beta1").get<double>(),
                  adam.at("beta2").get<double>(), adam.at("epsilon").get<double>()};
        b.unimodal_trained = doc.at("stages").at("unimodal").get<std::array<bool, kNumModalities>>();
        b.joint_trained = doc.at("stages").at("joint").get<bool>();
        for (const auto& s : doc.at("history")) b.history.push_back(stage_from(s));
        b.vocab = data::Vocabulary(doc.at("vocabulary").get<std::vector<std::string>>());
        const auto& unimodal = doc.at("unimodal");
        const auto& encoders = doc.at("joint").at("encoders");
        if (unimodal.size() != kNumModalities || encoders.size() != kNumModalities)
            throw DataError("checkpoint: expected three encoders per stage");
        for (std::size_t k = 0; k < kNumModalities; ++k) {
            b.unimodal[k] = encoder_from(unimodal[k]);
            b.joint.encoders[k] = encoder_from(encoders[k]);
        }
        b.joint.fusion = fusion_from(doc.at("joint").at("fusion"));
        b.validate();
        return b;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle) {
    if (!bundle_finite(bundle)) throw NumericError("refusing to save a checkpoint with non-finite parameters");
    write_file_atomic(path, serialize_checkpoint(bundle));
}

ModelBundle load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

std::string checkpoint_id(const ModelBundle& bundle) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_checkpoint(bundle))));
    return buf;
}

}  // namespace mmturn
