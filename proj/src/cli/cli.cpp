#include "mmturn/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmturn/data/labeler.hpp"
#include "mmturn/data/manifest.hpp"
#include "mmturn/data/samples.hpp"
#include "mmturn/data/synthetic.hpp"
#include "mmturn/eval.hpp"
#include "mmturn/io.hpp"
#include "mmturn/model.hpp"
#include "mmturn/streaming.hpp"
#include "mmturn/training.hpp"

namespace mmturn::cli {

namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return kExitUsage;
        case ErrorKind::Numeric: return kExitNumeric;
        case ErrorKind::Data:
        case ErrorKind::Dimension: return kExitData;
    }
    return kExitData;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void report_error(std::ostream& err, const char* kind, const std::string& message) {
    const nlohmann::ordered_json j = {{"error", kind}, {"message", message}};
    err << j.dump() << '\n';
}

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Data: return "data";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Dimension: return "dimension";
    }
    return "data";
}

struct Common {
    std::uint64_t seed = 0;
    bool verbose = false;
};

struct GenOptions {
    std::string out;
    std::string hidden;
    data::SyntheticConfig synth;
};

struct LabelOptions {
    std::string in;
    std::string out;
    std::string bc_vocab;
};

struct ModelOptions {
    std::size_t hidden = 64;
    std::size_t feature_width = kDefaultFeatureWidth;
    std::size_t head_hidden = 64;
    std::size_t rank = 16;
    std::size_t fused_width = 256;
    std::size_t n = 0;  // 0: take from the manifest
    CLI::Option* rank_opt = nullptr;
    CLI::Option* fused_width_opt = nullptr;
};

struct TrainOptions {
    std::string manifest;
    std::string checkpoint;
    std::string out;
    std::string metrics;
    std::string features;
    std::string modalities = "TAV";
    std::size_t epochs = 20;
    double lr = 1e-3;
    std::size_t batch_size = 1;
    double p = 0.1;
    bool from_scratch = false;
    ModelOptions model;
};

struct EvalOptions {
    std::string manifest;
    std::string checkpoint;
    std::string report;
    std::string features;
    std::string modalities = "TAV";
    std::string combos = "all";
    bool serial = false;
};

struct PredictOptions {
    std::string checkpoint;
    std::optional<double> tau_turn;
    std::optional<double> tau_bc;
    bool auto_reset = false;
    bool replay = false;
};

void write_text(const std::string& path, const std::string& text) { write_file_atomic(path, text); }

std::vector<data::Sample> load_samples(const std::string& manifest_path, const data::Vocabulary& vocab,
                                       std::size_t video_frames, const std::string& features,
                                       std::size_t feature_width) {
    const data::Manifest manifest = data::parse_manifest(fs::path(manifest_path));
    auto samples = data::build_samples(manifest, vocab, data::SampleOptions{video_frames, manifest.header.audio_hop});
    if (!features.empty()) {
        const auto records = data::read_feature_records(fs::path(features));
        data::attach_precomputed(samples, records, feature_width);
    }
    if (samples.empty()) throw DataError("manifest " + manifest_path + " has no word frames");
    return samples;
}

ModelConfig model_config(const ModelOptions& o, const data::ManifestHeader& header) {
    ModelConfig c;
    c.audio_width = header.audio_width;
    c.video_width = header.video_width;
    c.encoder_hidden = o.hidden;
    c.feature_width = o.feature_width;
    c.head_hidden = {o.head_hidden};
    c.rank = o.rank;
    c.fused_width = o.fused_width;
    c.fusion_head_hidden = {o.head_hidden};
    c.video_frames = o.n > 0 ? o.n : header.video_frames;
    c.audio_hop = header.audio_hop;
    return c;
}

MetricsSink metrics_sink(std::vector<EpochMetrics>& all, const Common& common, std::ostream& err) {
    return [&all, &common, &err](const EpochMetrics& m) {
        all.push_back(m);
        if (common.verbose) {
            char buf[200];
            std::snprintf(buf, sizeof buf, "%s %s epoch %zu loss %.6f accuracy %.4f\n", m.stage.c_str(),
                          m.modalities.c_str(), m.epoch, m.loss, m.accuracy);
            err << buf;
        }
    };
}

void write_metrics_file(const std::string& path, const std::vector<EpochMetrics>& all) {
    if (path.empty()) return;
    std::ostringstream s;
    write_metrics(s, all);
    write_text(path, s.str());
}

TrainConfig train_config(const TrainOptions& o, const Common& common) {
    TrainConfig c;
    c.learning_rate = o.lr;
    c.epochs = o.epochs;
    c.batch_size = o.batch_size;
    c.drop_probability = o.p;
    c.seed = common.seed;
    c.modalities = ModalityMask::parse(o.modalities);
    c.from_scratch = o.from_scratch;
    return c;
}

int cmd_gen(const GenOptions& o, const Common& common, std::ostream& out) {
    data::SyntheticConfig cfg = o.synth;
    cfg.seed = common.seed;
    const auto ds = data::gen_synthetic(cfg);
    data::write_manifest(fs::path(o.out), ds.manifest);
    const std::string hidden = o.hidden.empty() ? o.out + ".hidden.jsonl" : o.hidden;
    std::ostringstream h;
    data::write_hidden_records(h, ds.hidden);
    write_text(hidden, h.str());
    out << "wrote " << ds.manifest.word_count() << " word frames in " << ds.manifest.conversations.size()
        << " conversations to " << o.out << '\n';
    return kExitOk;
}

int cmd_label(const LabelOptions& o, std::ostream& out) {
    const auto manifest = data::parse_manifest(fs::path(o.in));
    data::BackchannelVocabulary vocab = data::BackchannelVocabulary::defaults();
    if (!o.bc_vocab.empty()) {
        std::istringstream lines(read_file(o.bc_vocab));
        std::vector<std::string> phrases;
        for (std::string line; std::getline(lines, line);)
            if (!trim(line).empty() && trim(line)[0] != '#') phrases.push_back(line);
        vocab = data::BackchannelVocabulary(phrases);
    }
    const auto labeled = data::label_manifest(manifest, vocab);
    data::write_manifest(fs::path(o.out), labeled);
    out << "labeled " << labeled.word_count() << " word frames to " << o.out << '\n';
    return kExitOk;
}

int cmd_train_uni(const TrainOptions& o, const Common& common, std::ostream& out, std::ostream& err) {
    const auto manifest = data::parse_manifest(fs::path(o.manifest));
    ModelBundle bundle;
    if (!o.checkpoint.empty()) {
        bundle = load_checkpoint(o.checkpoint);
    } else {
        bundle = ModelBundle::init(model_config(o.model, manifest.header), data::Vocabulary::from_manifest(manifest),
                                   common.seed);
    }
    auto samples = data::build_samples(manifest, bundle.vocab,
                                       data::SampleOptions{bundle.config.video_frames, manifest.header.audio_hop});
    if (!o.features.empty())
        data::attach_precomputed(samples, data::read_feature_records(fs::path(o.features)),
                                 bundle.config.feature_width);
    if (samples.empty()) throw DataError("manifest " + o.manifest + " has no word frames");
    std::vector<EpochMetrics> all;
    train_unimodal_stage(bundle, samples, train_config(o, common), metrics_sink(all, common, err));
    save_checkpoint(o.out, bundle);
    write_metrics_file(o.metrics, all);
    out << "stage 1 (" << o.modalities << ") trained on " << samples.size() << " word frames, checkpoint "
        << checkpoint_id(bundle) << " -> " << o.out << '\n';
    return kExitOk;
}

int cmd_train_joint(const TrainOptions& o, const Common& common, std::ostream& out, std::ostream& err) {
    const auto manifest = data::parse_manifest(fs::path(o.manifest));
    ModelBundle bundle;
    if (!o.checkpoint.empty()) {
        bundle = load_checkpoint(o.checkpoint);
    } else if (o.from_scratch) {
        bundle = ModelBundle::init(model_config(o.model, manifest.header), data::Vocabulary::from_manifest(manifest),
                                   common.seed);
    } else {
        throw UsageError("train-joint needs --checkpoint from train-uni, or --from-scratch");
    }
    // the fusion block is built fresh in this stage, so its shape may differ from stage 1's record
    if (o.model.rank_opt->count() > 0) bundle.config.rank = o.model.rank;
    if (o.model.fused_width_opt->count() > 0) bundle.config.fused_width = o.model.fused_width;
    auto samples = data::build_samples(manifest, bundle.vocab,
                                       data::SampleOptions{bundle.config.video_frames, manifest.header.audio_hop});
    if (!o.features.empty())
        data::attach_precomputed(samples, data::read_feature_records(fs::path(o.features)),
                                 bundle.config.feature_width);
    if (samples.empty()) throw DataError("manifest " + o.manifest + " has no word frames");
    std::vector<EpochMetrics> all;
    train_joint_stage(bundle, samples, train_config(o, common), metrics_sink(all, common, err));
    save_checkpoint(o.out, bundle);
    write_metrics_file(o.metrics, all);
    out << "stage 2 (" << o.modalities << ", p=" << o.p << ") trained on " << samples.size()
        << " word frames, checkpoint " << checkpoint_id(bundle) << " -> " << o.out << '\n';
    return kExitOk;
}

int cmd_eval(const EvalOptions& o, bool ablate, std::ostream& out, std::ostream& err) {
    const ModelBundle bundle = load_checkpoint(o.checkpoint);
    const auto samples =
        load_samples(o.manifest, bundle.vocab, bundle.config.video_frames, o.features, bundle.config.feature_width);
    const auto exec = o.serial ? kernels::Exec::Serial : kernels::Exec::Parallel;
    std::vector<EvalReport> reports;
    if (ablate) {
        const auto combos = parse_combos(o.combos);
        reports = run_ablation(bundle, samples, combos, exec);
    } else {
        reports.push_back(evaluate(bundle, samples, ModalityMask::parse(o.modalities), exec));
    }
    for (const auto& r : reports)
        if (r.reduced > 0)
            err << "warning: " << r.reduced << " samples lacked part of " << r.mask.to_string()
                << "; evaluated on the modalities present\n";
    out << format_table(reports);
    if (!o.report.empty()) {
        std::ostringstream s;
        write_reports(s, reports);
        write_text(o.report, s.str());
    }
    return kExitOk;
}

int cmd_predict(const PredictOptions& o, std::istream& in, std::ostream& out) {
    const ModelBundle bundle = load_checkpoint(o.checkpoint);
    StreamingPredictor predictor(bundle, DecisionRule{o.tau_turn, o.tau_bc}, o.auto_reset,
                                 o.replay ? StreamingPredictor::Mode::Replay : StreamingPredictor::Mode::Incremental);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto result = predictor.push(parse_stream_frame(line));
            if (result) out << format_stream_output(*result) << std::endl;
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        } catch (const DimensionError& e) {
            throw DimensionError("line " + std::to_string(line_no) + ": frame", e.expected(), e.actual());
        }
    }
    out.flush();
    return kExitOk;
}

void add_path(CLI::App* app, const char* flag, std::string& target, const char* env, const char* help,
              bool must_exist, bool required = false) {
    auto* opt = app->add_option(flag, target, help);
    if (env) opt->envname(env);
    if (must_exist) opt->check(CLI::ExistingFile);
    if (required) opt->required();
}

void add_model_options(CLI::App* app, ModelOptions& m) {
    app->add_option("--hidden", m.hidden, "Encoder hidden width")->capture_default_str();
    app->add_option("--feature-width", m.feature_width, "Encoder output width d_k")->capture_default_str();
    app->add_option("--head-hidden", m.head_hidden, "Hidden width of the prediction heads")->capture_default_str();
    m.rank_opt = app->add_option("--rank", m.rank, "Fusion rank r")->capture_default_str();
    m.fused_width_opt = app->add_option("--fused-width", m.fused_width, "Fused width d_h")->capture_default_str();
    app->add_option("--n", m.n, "Video frames per word (0: manifest header)")->capture_default_str();
}

void add_train_options(CLI::App* app, TrainOptions& t) {
    app->add_option("--modalities", t.modalities, "Modalities to train, e.g. TAV or T,A")->capture_default_str();
    app->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
    app->add_option("--lr", t.lr, "Adam learning rate (1e-5 suits pretrained backbones)")
        ->capture_default_str();
    app->add_option("--batch-size", t.batch_size, "Samples per Adam step")->capture_default_str();
    add_path(app, "--metrics", t.metrics, "MMF2F_METRICS", "Per-epoch metrics (JSON Lines)", false);
    add_path(app, "--features", t.features, "MMF2F_FEATURES", "Precomputed feature records (JSON Lines)", true);
    add_model_options(app, t.model);
}

std::vector<std::string> with_config_file(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty())
        if (const char* env = std::getenv("MMF2F_CONFIG")) path = env;
    if (path.empty() || rest.empty()) return rest;
    if (!fs::is_regular_file(path)) throw UsageError("config file not found: " + path);
    // file values sit between the subcommand and the command-line flags, so the flags win
    std::vector<std::string> merged{rest.front()};
    for (auto& a : config_file_arguments(read_file(path))) merged.push_back(std::move(a));
    merged.insert(merged.end(), rest.begin() + 1, rest.end());
    return merged;
}

}  // namespace

std::vector<std::string> config_file_arguments(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream lines(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(lines, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        if (value == "false") continue;
        out.push_back("--" + key);
        if (value == "true") continue;
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            out.push_back(value.substr(1, value.size() - 2));
            continue;
        }
        // unquoted lists such as "cue-presence = 0.5 0.5 0.5" become separate values
        std::istringstream items(value);
        for (std::string item; items >> item;) out.push_back(item);
    }
    return out;
}

int run_command(const std::vector<std::string>& raw_args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-modal turn-taking and backchannel prediction", "mmturn"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "Seed for all randomness")->capture_default_str();
        sub->add_flag("-v,--verbose", common.verbose, "Log per-epoch progress to stderr");
        sub->add_option("--config", "Flat key = value file; flags override it")->envname("MMF2F_CONFIG");
    };

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic manifest and its hidden generator record");
    add_common(gen_cmd);
    add_path(gen_cmd, "--out", gen.out, "MMF2F_OUT", "Manifest output path", false, true);
    add_path(gen_cmd, "--hidden", gen.hidden, nullptr, "Hidden record path (default <out>.hidden.jsonl)", false);
    gen_cmd->add_option("--words", gen.synth.num_words, "Word frames to generate")->capture_default_str();
    gen_cmd->add_option("--utterances", gen.synth.utterances_per_conversation, "Utterances per conversation")
        ->capture_default_str();
    gen_cmd->add_option("--n", gen.synth.video_frames, "Video frames per word (header n)")->capture_default_str();
    gen_cmd->add_option("--mean-scale", gen.synth.mean_scale, "Length of the class mean vectors")
        ->capture_default_str();
    gen_cmd->add_option("--sigma", gen.synth.noise_sigma, "Noise standard deviation")->capture_default_str();
    gen_cmd->add_option("--cue-presence", gen.synth.cue_presence, "Cue probability for T, A, V (three values)")
        ->expected(3);
    gen_cmd->add_option("--priors", gen.synth.priors, "KEEP, TURN, BC priors (three values)")->expected(3);
    gen_cmd->add_option("--vocab-size", gen.synth.vocab_size, "Token vocabulary size")->capture_default_str();
    gen_cmd->add_option("--audio-width", gen.synth.audio_width, "Audio frame width")->capture_default_str();
    gen_cmd->add_option("--video-width", gen.synth.video_width, "Video frame width")->capture_default_str();

    LabelOptions label;
    auto* label_cmd = app.add_subcommand("label", "Apply the KEEP/TURN/BACKCHANNEL annotation rules");
    add_common(label_cmd);
    add_path(label_cmd, "--in", label.in, "MMF2F_MANIFEST", "Input manifest", true, true);
    add_path(label_cmd, "--out", label.out, "MMF2F_OUT", "Labeled manifest output", false, true);
    add_path(label_cmd, "--bc-vocab", label.bc_vocab, nullptr, "Backchannel phrases, one per line", true);

    TrainOptions uni;
    auto* uni_cmd = app.add_subcommand("train-uni", "Stage 1: train uni-modal encoders with their heads");
    add_common(uni_cmd);
    add_path(uni_cmd, "--manifest", uni.manifest, "MMF2F_MANIFEST", "Labeled training manifest", true, true);
    add_path(uni_cmd, "--checkpoint", uni.checkpoint, "MMF2F_CHECKPOINT", "Existing checkpoint to extend", true);
    add_path(uni_cmd, "--out", uni.out, "MMF2F_OUT", "Checkpoint output path", false, true);
    add_train_options(uni_cmd, uni);

    TrainOptions joint;
    auto* joint_cmd = app.add_subcommand("train-joint", "Stage 2: joint fusion training with modality dropout");
    add_common(joint_cmd);
    add_path(joint_cmd, "--manifest", joint.manifest, "MMF2F_MANIFEST", "Labeled training manifest", true, true);
    add_path(joint_cmd, "--checkpoint", joint.checkpoint, "MMF2F_CHECKPOINT", "Stage-1 checkpoint", true);
    add_path(joint_cmd, "--out", joint.out, "MMF2F_OUT", "Checkpoint output path", false, true);
    joint_cmd->add_option("--p", joint.p, "Modality dropout probability")->capture_default_str();
    joint_cmd->add_flag("--from-scratch", joint.from_scratch, "Skip stage-1 initialisation of the encoders");
    add_train_options(joint_cmd, joint);

    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one modality combination");
    add_common(eval_cmd);
    add_path(eval_cmd, "--manifest", ev.manifest, "MMF2F_MANIFEST", "Labeled evaluation manifest", true, true);
    add_path(eval_cmd, "--checkpoint", ev.checkpoint, "MMF2F_CHECKPOINT", "Checkpoint", true, true);
    add_path(eval_cmd, "--report", ev.report, "MMF2F_REPORT", "Report output (JSON Lines)", false);
    add_path(eval_cmd, "--features", ev.features, "MMF2F_FEATURES", "Precomputed feature records", true);
    eval_cmd->add_option("--modalities", ev.modalities, "Modality combination, e.g. TA")->capture_default_str();
    eval_cmd->add_flag("--serial", ev.serial, "Evaluate on one thread");

    EvalOptions ab;
    auto* ablate_cmd = app.add_subcommand("ablate", "Evaluate one checkpoint on several modality combinations");
    add_common(ablate_cmd);
    add_path(ablate_cmd, "--manifest", ab.manifest, "MMF2F_MANIFEST", "Labeled evaluation manifest", true, true);
    add_path(ablate_cmd, "--checkpoint", ab.checkpoint, "MMF2F_CHECKPOINT", "Checkpoint", true, true);
    add_path(ablate_cmd, "--report", ab.report, "MMF2F_REPORT", "Report output (JSON Lines)", false);
    add_path(ablate_cmd, "--features", ab.features, "MMF2F_FEATURES", "Precomputed feature records", true);
    ablate_cmd->add_option("--combos", ab.combos, "\"all\" or a list such as T,TA,TAV")->capture_default_str();
    ablate_cmd->add_flag("--serial", ab.serial, "Evaluate on one thread");

    PredictOptions pr;
    auto* predict_cmd = app.add_subcommand("predict", "Streaming prediction: one JSON record per word frame on stdin");
    add_common(predict_cmd);
    add_path(predict_cmd, "--checkpoint", pr.checkpoint, "MMF2F_CHECKPOINT", "Checkpoint", true, true);
    predict_cmd->add_option("--tau-turn", pr.tau_turn, "TURN only when p_turn exceeds this")
        ->check(CLI::Range(0.0, 1.0));
    predict_cmd->add_option("--tau-bc", pr.tau_bc, "BACKCHANNEL only when p_bc exceeds this")
        ->check(CLI::Range(0.0, 1.0));
    predict_cmd->add_flag("--auto-reset", pr.auto_reset, "Reset context after a TURN decision");
    predict_cmd->add_flag("--replay", pr.replay, "Re-encode the whole prefix on every frame");

    try {
        std::vector<std::string> args = with_config_file(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        report_error(err, kind_name(e.kind()), e.what());
        return exit_code(e.kind());
    }

    try {
        if (*gen_cmd) return cmd_gen(gen, common, out);
        if (*label_cmd) return cmd_label(label, out);
        if (*uni_cmd) return cmd_train_uni(uni, common, out, err);
        if (*joint_cmd) return cmd_train_joint(joint, common, out, err);
        if (*eval_cmd) return cmd_eval(ev, false, out, err);
        if (*ablate_cmd) return cmd_eval(ab, true, out, err);
        if (*predict_cmd) return cmd_predict(pr, in, out);
    } catch (const Error& e) {
        report_error(err, kind_name(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        report_error(err, "data", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        report_error(err, "internal", e.what());
        return 1;
    }
    return kExitUsage;
}

}  // namespace mmturn::cli
