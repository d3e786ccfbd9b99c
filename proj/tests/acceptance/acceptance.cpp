// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   mmturn_acceptance <path to mmturn cli> [scratch dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "mmturn/core/gradcheck.hpp"
#include "mmturn/data/labeler.hpp"
#include "mmturn/eval.hpp"
#include "mmturn/fusion.hpp"
#include "mmturn/io.hpp"
#include "mmturn/training.hpp"
#include "oracles.hpp"

using namespace mmturn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Timer {
    std::chrono::steady_clock::time_point wall = std::chrono::steady_clock::now();
    std::clock_t cpu = std::clock();
    double wall_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
    }
    double cpu_s() const { return static_cast<double>(std::clock() - cpu) / CLOCKS_PER_SEC; }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const Timer t;
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::max(t.wall_s(), t.cpu_s());
    const bool in_time = secs < limit_s;
    if (!in_time) o.detail += fmt("; over the %.0f s budget", limit_s);
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << " " << name << ": " << o.detail
              << fmt(" (%.2f s)", secs) << std::endl;
}

// ---------------------------------------------------------------------------

Outcome fusion_identity() {
    Rng rng(101);
    double worst = 0.0;
    const int instances = 200;
    for (int n = 0; n < instances; ++n) {
        FusionConfig cfg;
        cfg.rank = 1 + rng.uniform_int(3);
        cfg.fused_width = 1 + rng.uniform_int(4);
        for (auto& d : cfg.feature_widths) d = 1 + rng.uniform_int(4);
        cfg.head_hidden = {2};
        Rng init = rng.split(static_cast<std::uint64_t>(n));
        const FusionParams p = FusionParams::init(cfg, init);
        FeatureSet z;
        for (std::size_t k = 0; k < 3; ++k) {
            Vector v(cfg.feature_widths[k]);
            for (auto& x : v) x = rng.uniform(-2, 2);
            z[k] = v;
        }
        const Vector h = fuse(z, ModalityMask::full(), p);

        const auto w = oracle::full_weight(p);
        const std::size_t A = cfg.feature_widths[0], B = cfg.feature_widths[1], C = cfg.feature_widths[2];
        double err = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < cfg.fused_width; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < A; ++a)
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t c = 0; c < C; ++c)
                        acc += w[((j * A + a) * B + b) * C + c] * (*z[0])[a] * (*z[1])[b] * (*z[2])[c];
            err = std::max(err, std::abs(acc - h[j]));
            scale = std::max(scale, std::abs(acc));
        }
        worst = std::max(worst, err / std::max(scale, 1e-300));
    }
    return {worst <= 1e-9, fmt("max relative inf-norm error %.2e over %d instances (limit 1e-9)", worst, instances)};
}

Outcome modality_degeneracy() {
    Rng rng(202);
    int cases = 0, mismatches = 0;
    for (int n = 0; n < 200; ++n) {
        FusionConfig cfg;
        cfg.rank = 1 + rng.uniform_int(4);
        cfg.fused_width = 1 + rng.uniform_int(6);
        for (auto& d : cfg.feature_widths) d = 1 + rng.uniform_int(6);
        cfg.head_hidden = {2};
        Rng init = rng.split(static_cast<std::uint64_t>(n));
        const FusionParams p = FusionParams::init(cfg, init);
        std::array<Vector, 3> z;
        for (std::size_t k = 0; k < 3; ++k) {
            z[k] = Vector(cfg.feature_widths[k]);
            for (auto& x : z[k]) x = rng.normal();
        }
        for (const auto& mask : ModalityMask::all_nonempty()) {
            FeatureSet present;
            std::array<Vector, 3> t;
            for (Modality m : kAllModalities) {
                const auto k = static_cast<std::size_t>(m);
                if (mask.has(m)) {
                    present[k] = z[k];
                    t[k] = project_modality(z[k], m, p);
                } else {
                    t[k] = Vector(cfg.rank * cfg.fused_width, 1.0);
                }
            }
            Vector want(cfg.fused_width);
            for (std::size_t i = 0; i < cfg.rank; ++i)
                for (std::size_t j = 0; j < cfg.fused_width; ++j) {
                    const std::size_t r = i * cfg.fused_width + j;
                    want[j] += t[0][r] * t[1][r] * t[2][r];
                }
            const Vector got = fuse(present, mask, p);
            const Vector got_par = fuse(present, mask, p, kernels::Exec::Parallel);
            ++cases;
            if (!(got == want) || !(got_par == want)) ++mismatches;
        }
    }
    return {mismatches == 0 && cases >= 1000,
            fmt("%d of %d mask cases bit-identical to the ones-vector substitution", cases - mismatches, cases)};
}

Outcome gradient_correctness() {
    const fixture::Small fx(300, 303, 4);
    const auto b = fx.bundle(303);
    std::vector<data::Sample> picks;
    for (const auto& s : fx.samples)
        if (s.words.size() >= 2 && s.words.size() <= 4 && picks.size() < 3) picks.push_back(s);
    double worst = 0.0;
    std::size_t checks = 0;
    for (const auto& s : picks) {
        for (const auto& mask : ModalityMask::all_nonempty()) {
            JointModel p = b.joint;
            JointModel g = p.zeros_like();
            joint_loss_grad(p, s, mask, g);
            auto loss = [&](std::span<const double> v) {
                JointModel q = p;
                assign(refs_of(q), v);
                return joint_loss(q, s, mask);
            };
            worst = std::max(worst,
                             finite_diff_check(loss, flatten(refs_of(p)), flatten(refs_of(g)), 1e-5).max_rel_error);
            ++checks;
        }
        // single-modality masks are served by the stage-1 encoder and head at inference
        for (Modality m : kAllModalities) {
            EncoderParams p = b.unimodal_encoder(m);
            EncoderParams g = p.zeros_like();
            unimodal_loss_grad(p, s, g);
            auto loss = [&](std::span<const double> v) {
                EncoderParams q = p;
                assign(refs_of(q), v);
                return unimodal_loss(q, s);
            };
            worst = std::max(worst,
                             finite_diff_check(loss, flatten(refs_of(p)), flatten(refs_of(g)), 1e-5).max_rel_error);
            ++checks;
        }
    }
    return {worst < 1e-4 && checks == 30,
            fmt("max relative error %.2e over %zu checks (7 joint masks + 3 stage-1 paths, 3 samples; limit 1e-4)",
                worst, checks)};
}

bool labels_well_formed(const data::Conversation& c) {
    for (const auto& u : c.utterances) {
        std::size_t turns = 0;
        for (const auto& w : u.words) {
            if (!w.label) return false;
            turns += *w.label == Action::Turn;
        }
        const Action last = *u.words.back().label;
        const std::size_t closers = turns + (last == Action::Backchannel ? 1 : 0);
        if (closers != 1 || (last != Action::Turn && last != Action::Backchannel)) return false;
    }
    return true;
}

/// Two speakers taking turns with random gaps and overlaps, mixing backchannel phrases in.
data::Conversation random_conversation(Rng& rng, std::size_t id) {
    static const std::vector<std::vector<std::string>> pieces{
        {"yeah"}, {"i", "see"}, {"mm-hmm"}, {"okay"}, {"right"}, {"so", "anyway"},
        {"we", "went", "there"}, {"really"}, {"yes", "sure"}, {"that", "was", "long"}};
    data::Conversation c;
    c.conv_id = "r" + std::to_string(id);
    c.speakers = {"a", "b"};
    double t = 0.0;
    const std::size_t n = 2 + rng.uniform_int(8);
    for (std::size_t u = 0; u < n; ++u) {
        data::Utterance utt;
        utt.conv_id = c.conv_id;
        utt.utt_id = c.conv_id + "_" + std::to_string(u);
        utt.speaker = rng.bernoulli(0.5) ? "a" : "b";
        double w0 = t;
        const std::size_t parts = 1 + rng.uniform_int(3);
        for (std::size_t k = 0; k < parts; ++k)
            for (const auto& w : pieces[rng.uniform_int(pieces.size())]) {
                const double d = rng.uniform(0.1, 0.5);
                utt.words.push_back({w, w0, w0 + d, utt.speaker, std::nullopt});
                w0 += d + rng.uniform(0.0, 0.1);
            }
        // next utterance may start before this one ends
        t = rng.uniform(t, w0 + 0.5);
        // keep one speaker's utterances apart in time
        for (const auto& prev : c.utterances)
            if (prev.speaker == utt.speaker && prev.end() > utt.start()) {
                const double shift = prev.end() - utt.start() + 0.01;
                for (auto& w : utt.words) {
                    w.t_start += shift;
                    w.t_end += shift;
                }
            }
        t = std::max(t, utt.start());
        c.utterances.push_back(std::move(utt));
    }
    return c;
}

std::vector<Action> labels(const data::Utterance& u) {
    std::vector<Action> out;
    for (const auto& w : u.words) out.push_back(*w.label);
    return out;
}

data::Utterance plain_utterance(const std::string& id, const std::string& spk,
                                const std::vector<std::pair<std::string, std::pair<double, double>>>& words) {
    data::Utterance u;
    u.conv_id = "c";
    u.utt_id = id;
    u.speaker = spk;
    for (const auto& [w, span] : words) u.words.push_back({w, span.first, span.second, spk, std::nullopt});
    return u;
}

Outcome labeler_properties() {
    const auto vocab = data::BackchannelVocabulary::defaults();
    std::size_t checked = 0, bad = 0;

    data::SyntheticConfig cfg;
    cfg.num_words = 34000;
    cfg.seed = 404;
    const auto synth = data::gen_synthetic(cfg).manifest;
    Rng rng(405);
    for (std::size_t i = 0; i < 1000; ++i) {
        const data::Conversation& base =
            i < synth.conversations.size() ? synth.conversations[i] : synth.conversations.front();
        for (const data::Conversation& c : {base, random_conversation(rng, i)}) {
            const auto once = data::label_words(c, vocab);
            ++checked;
            if (!labels_well_formed(once) || !(data::label_words(once, vocab) == once)) ++bad;
        }
    }
    const bool enough = synth.conversations.size() >= 1000;

    using K = std::vector<Action>;
    const Action KEEP = Action::Keep, TURN = Action::Turn, BC = Action::Backchannel;
    int cases_ok = 0;
    {
        data::Conversation c{"c", {"a", "b"}, {plain_utterance("u1", "a", {{"how", {0.0, 0.2}}, {"are", {0.2, 0.4}}, {"you", {0.4, 0.7}}})}};
        cases_ok += labels(data::label_words(c, vocab).utterances[0]) == K{KEEP, KEEP, TURN};
    }
    {
        data::Conversation c{"c",
                             {"a", "b"},
                             {plain_utterance("u1", "a", {{"so", {0.0, 0.5}}, {"we", {0.5, 1.0}}, {"left", {1.0, 2.0}}}),
                              plain_utterance("u2", "b", {{"yeah", {0.8, 1.1}}})}};
        cases_ok += labels(data::label_words(c, vocab).utterances[1]) == K{BC};
    }
    {
        data::Conversation c{"c",
                             {"a", "b"},
                             {plain_utterance("u1", "a",
                                              {{"yeah", {0.0, 0.2}}, {"I", {0.2, 0.3}}, {"agree", {0.3, 0.6}},
                                               {"totally", {0.6, 1.0}}}),
                              plain_utterance("u2", "b", {{"then", {1.5, 1.8}}})}};
        cases_ok += labels(data::label_words(c, vocab).utterances[0]) == K{KEEP, KEEP, KEEP, TURN};
    }
    return {bad == 0 && enough && cases_ok == 3,
            fmt("%zu conversations (1000 generated, 1000 randomly timed): %zu violations; truth-table cases %d/3",
                checked, bad, cases_ok)};
}

Outcome bayes_sanity() {
    data::SyntheticConfig cfg;
    cfg.num_words = 10000;
    cfg.seed = 505;
    const auto ds = data::gen_synthetic(cfg);
    auto samples = data::build_samples(ds.manifest, data::Vocabulary::from_manifest(ds.manifest),
                                       data::SampleOptions{cfg.video_frames, cfg.audio_hop});
    samples.resize(10000);
    std::vector<ModalityMask> masks{ModalityMask::none()};
    for (const auto& m : ModalityMask::all_nonempty()) masks.push_back(m);
    std::vector<std::size_t> hits(masks.size(), 0);
    double worst_norm = 0.0;
    for (const auto& s : samples)
        for (std::size_t k = 0; k < masks.size(); ++k) {
            const auto p = data::bayes_oracle(s, masks[k], cfg);
            worst_norm = std::max(worst_norm, std::abs(p.p[0] + p.p[1] + p.p[2] - 1.0));
            hits[k] += p.argmax() == s.label;
        }
    auto superset = [](const ModalityMask& a, const ModalityMask& b) { return a.intersect(b) == b; };
    double worst_drop = -1.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < masks.size(); ++i)
        for (std::size_t j = 0; j < masks.size(); ++j)
            if (superset(masks[i], masks[j])) {
                ++pairs;
                worst_drop = std::max(worst_drop, (static_cast<double>(hits[j]) - static_cast<double>(hits[i])) / 1e4);
            }
    const double tri = static_cast<double>(hits.back()) / 1e4;
    return {worst_norm <= 1e-12 && worst_drop <= 0.01,
            fmt("normalisation error %.1e on 10000 samples x 8 masks; worst acc(S2) - acc(S1) over %zu superset "
                "pairs %.4f (limit 0.01); tri-modal oracle accuracy %.4f",
                worst_norm, pairs, worst_drop, tri)};
}

// ---------------------------------------------------------------------------

struct SeedRun {
    std::vector<EvalReport> rmdt;
    std::vector<EvalReport> plain;
    double bayes_tri_accuracy = 0.0;
};

std::vector<SeedRun> fusion_runs;

double macro(const std::vector<EvalReport>& rs, const ModalityMask& m) {
    for (const auto& r : rs)
        if (r.mask == m) return r.macro_f1;
    throw std::runtime_error("mask missing from ablation");
}

double accuracy(const std::vector<EvalReport>& rs, const ModalityMask& m) {
    for (const auto& r : rs)
        if (r.mask == m) return r.accuracy;
    throw std::runtime_error("mask missing from ablation");
}

void train_seed(std::uint64_t seed) {
    data::SyntheticConfig train_cfg;
    train_cfg.num_words = 8000;
    train_cfg.seed = seed;
    data::SyntheticConfig test_cfg = train_cfg;
    test_cfg.num_words = 2000;
    test_cfg.seed = 100 + seed;
    const auto train_manifest = data::gen_synthetic(train_cfg).manifest;
    const auto test_manifest = data::gen_synthetic(test_cfg).manifest;
    const auto vocab = data::Vocabulary::from_manifest(train_manifest);
    const data::SampleOptions opts{train_cfg.video_frames, train_cfg.audio_hop};
    auto train = data::build_samples(train_manifest, vocab, opts);
    auto test = data::build_samples(test_manifest, vocab, opts);
    train.resize(8000);
    test.resize(2000);

    ModelConfig mc;
    mc.audio_width = train_cfg.audio_width;
    mc.video_width = train_cfg.video_width;
    mc.encoder_hidden = 32;
    mc.feature_width = 32;
    mc.head_hidden = {32};
    mc.rank = 16;
    mc.fused_width = 32;
    mc.fusion_head_hidden = {32};
    mc.video_frames = train_cfg.video_frames;
    mc.audio_hop = train_cfg.audio_hop;

    ModelBundle stage1 = ModelBundle::init(mc, vocab, seed);
    TrainConfig uni;
    uni.epochs = 10;
    uni.learning_rate = 1e-3;
    uni.seed = seed;
    train_unimodal_stage(stage1, train, uni);

    TrainConfig joint = uni;
    joint.learning_rate = 3e-4;
    SeedRun run;
    const auto combos = ModalityMask::all_nonempty();
    for (double p : {0.1, 0.0}) {
        ModelBundle b = stage1;
        joint.drop_probability = p;
        train_joint_stage(b, train, joint);
        (p > 0 ? run.rmdt : run.plain) = run_ablation(b, test, combos);
    }
    std::size_t hits = 0;
    for (const auto& s : test) hits += data::bayes_oracle(s, ModalityMask::full(), test_cfg).argmax() == s.label;
    run.bayes_tri_accuracy = static_cast<double>(hits) / static_cast<double>(test.size());

    std::cout << "      seed " << seed << " macro-F1 (RMDT | no RMDT):";
    for (const auto& m : combos)
        std::cout << fmt(" %s %.3f|%.3f", m.to_string().c_str(), macro(run.rmdt, m), macro(run.plain, m));
    std::cout << fmt("; tri acc %.4f, oracle %.4f", accuracy(run.rmdt, ModalityMask::full()), run.bayes_tri_accuracy)
              << std::endl;
    fusion_runs.push_back(std::move(run));
}

Outcome fusion_gain() {
    for (std::uint64_t s : {1, 2, 3}) train_seed(s);
    const auto combos = ModalityMask::all_nonempty();
    auto seed_mean = [&](const ModalityMask& m) {
        double acc = 0.0;
        for (const auto& r : fusion_runs) acc += macro(r.rmdt, m);
        return acc / static_cast<double>(fusion_runs.size());
    };
    double uni = 0.0, bi = 0.0, tri = 0.0, best_uni = 0.0, worst_bi = 1.0, best_bi = 0.0;
    for (const auto& m : combos) {
        const double v = seed_mean(m);
        if (m.count() == 1) {
            uni += v / 3;
            best_uni = std::max(best_uni, v);
        } else if (m.count() == 2) {
            bi += v / 3;
            worst_bi = std::min(worst_bi, v);
            best_bi = std::max(best_bi, v);
        } else {
            tri = v;
        }
    }
    bool acc_ok = true;
    std::string acc_detail;
    for (const auto& r : fusion_runs) {
        const double a = accuracy(r.rmdt, ModalityMask::full());
        acc_ok = acc_ok && a >= 0.90 * r.bayes_tri_accuracy;
        acc_detail += fmt(" %.3f/%.3f", a, r.bayes_tri_accuracy);
    }
    const bool groups = tri - bi >= 0.02 && bi - uni >= 0.02;
    const bool per_combo = tri - best_bi >= 0.02 && worst_bi - best_uni >= 0.02;
    return {groups && per_combo && acc_ok,
            fmt("seed-mean macro-F1 tri %.3f, bi %.3f, uni %.3f (gaps %.3f, %.3f; limit 0.02); per combination: tri "
                "- best bi %.3f, worst bi - best uni %.3f (limit 0.02); tri acc/oracle per seed:%s (limit 0.90x)",
                tri, bi, uni, tri - bi, bi - uni, tri - best_bi, worst_bi - best_uni, acc_detail.c_str())};
}

Outcome rmdt_robustness() {
    if (fusion_runs.size() != 3) return {false, "training runs from criterion 6 missing"};
    double worst_ratio = 1e9, plain_best_drop = 1e9;
    for (const auto& r : fusion_runs) {
        const double tri = macro(r.rmdt, ModalityMask::full());
        const double plain_tri = macro(r.plain, ModalityMask::full());
        double drop = 0.0;
        for (const auto& m : ModalityMask::all_nonempty()) {
            if (m.count() != 2) continue;
            worst_ratio = std::min(worst_ratio, macro(r.rmdt, m) / tri);
            drop = std::max(drop, plain_tri - macro(r.plain, m));
        }
        plain_best_drop = std::min(plain_best_drop, drop);
    }
    return {worst_ratio >= 0.90 && plain_best_drop >= 0.20,
            fmt("RMDT: worst bi/tri macro-F1 ratio %.3f over 3 seeds x 3 masks (limit 0.90); no RMDT: largest bi-modal "
                "drop %.3f in the weakest seed (limit 0.20)",
                worst_ratio, plain_best_drop)};
}

// ---------------------------------------------------------------------------

std::string cli_path;
fs::path scratch;

int shell(const fs::path& cwd, const std::string& args, const std::string& stdout_file,
          const std::string& stdin_file = "") {
    std::string cmd = "cd '" + cwd.string() + "' && '" + cli_path + "' " + args + " > " + stdout_file;
    if (!stdin_file.empty()) cmd += " < " + stdin_file;
    cmd += " 2>> stderr.txt";
    return std::system(cmd.c_str());
}

Outcome determinism() {
    const std::vector<std::pair<std::string, std::string>> steps{
        {"gen", "gen --out train.jsonl --words 2000 --seed 7"},
        {"gen-test", "gen --out test.jsonl --words 500 --seed 8"},
        {"train-uni",
         "train-uni --manifest train.jsonl --out uni.json --metrics uni.metrics --epochs 2 --hidden 16 "
         "--feature-width 16 --head-hidden 16 --seed 7"},
        {"train-joint",
         "train-joint --manifest train.jsonl --checkpoint uni.json --out joint.json --metrics joint.metrics "
         "--epochs 2 --rank 4 --fused-width 16 --seed 7"},
        {"eval", "eval --manifest test.jsonl --checkpoint joint.json --report eval.jsonl"},
    };
    for (const char* run : {"run1", "run2"}) {
        const fs::path dir = scratch / "determinism" / run;
        fs::remove_all(dir);
        fs::create_directories(dir);
        for (const auto& [name, args] : steps)
            if (shell(dir, args, name + ".out") != 0) return {false, name + " failed in " + run};
    }
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto& e : fs::directory_iterator(scratch / "determinism" / "run1")) {
        const auto name = e.path().filename().string();
        if (name == "stderr.txt") continue;
        ++compared;
        if (read_file(e.path()) != read_file(scratch / "determinism" / "run2" / name)) differing.push_back(name);
    }
    std::string diff;
    for (const auto& d : differing) diff += " " + d;
    return {differing.empty() && compared >= 14,
            fmt("%zu output files and stdout captures of gen, train-uni, train-joint, eval compared byte for byte; "
                "%zu differ%s",
                compared, differing.size(), diff.c_str())};
}

Outcome streaming_consistency() {
    const fs::path dir = scratch / "determinism" / "run1";
    data::SyntheticConfig cfg;
    cfg.num_words = 600;
    cfg.seed = 909;
    const auto manifest = data::gen_synthetic(cfg).manifest;
    Rng rng(910);
    std::ofstream in(dir / "stream.jsonl");
    std::size_t utterances = 0, frames = 0;
    for (const auto& c : manifest.conversations)
        for (const auto& u : c.utterances) {
            if (utterances == 100) break;
            ++utterances;
            std::size_t audio_done = 0, video_done = 0;
            for (const auto& w : u.words) {
                nlohmann::json j = nlohmann::json::object();
                const bool text = rng.bernoulli(0.8), audio = rng.bernoulli(0.8);
                const bool video = rng.bernoulli(0.8) || (!text && !audio);
                if (text) j["token"] = w.text;
                std::vector<std::vector<double>> a, v;
                const std::size_t through =
                    std::min(data::audio_frames_through(u.start(), w.t_end, cfg.audio_hop), u.audio_frames->size());
                for (; audio_done < through; ++audio_done) a.push_back((*u.audio_frames)[audio_done].values());
                while (video_done < u.video_frames->size() && (*u.video_frames)[video_done].t <= w.t_end)
                    v.push_back((*u.video_frames)[video_done++].values.values());
                if (audio && !a.empty()) j["audio_frame"] = a;
                if (video && !v.empty()) j["video_frame"] = v;
                if (j.empty()) j["token"] = w.text;
                in << j.dump() << '\n';
                ++frames;
            }
            in << "{\"reset\":true}\n";
        }
    in.close();
    if (shell(dir, "predict --checkpoint joint.json", "stream_inc.out", "stream.jsonl") != 0)
        return {false, "predict failed"};
    if (shell(dir, "predict --checkpoint joint.json --replay", "stream_rep.out", "stream.jsonl") != 0)
        return {false, "predict --replay failed"};
    std::ifstream a(dir / "stream_inc.out"), b(dir / "stream_rep.out");
    std::size_t lines = 0, mismatched = 0;
    double worst = 0.0;
    for (std::string la, lb; std::getline(a, la) && std::getline(b, lb);) {
        ++lines;
        const auto ja = nlohmann::json::parse(la), jb = nlohmann::json::parse(lb);
        for (const char* k : {"p_keep", "p_turn", "p_bc"})
            worst = std::max(worst, std::abs(ja[k].get<double>() - jb[k].get<double>()));
        if (ja["decision"] != jb["decision"] || ja["modalities"] != jb["modalities"]) ++mismatched;
    }
    return {utterances == 100 && lines == frames && mismatched == 0 && worst <= 1e-12,
            fmt("%zu utterances, %zu frames with random modality gaps: max |incremental - replay| %.1e (limit 1e-12), "
                "%zu decision mismatches",
                utterances, lines, worst, mismatched)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: mmturn_acceptance <mmturn cli> [scratch dir]\n";
        return 2;
    }
    cli_path = fs::absolute(argv[1]).string();
    scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "mmturn_acceptance";
    fs::create_directories(scratch);

    report(1, "fusion identity", 5, fusion_identity);
    report(2, "modality-selection degeneracy", 5, modality_degeneracy);
    report(3, "gradient correctness", 60, gradient_correctness);
    report(4, "labeler properties", 10, labeler_properties);
    report(5, "Bayes-oracle sanity", 30, bayes_sanity);
    report(6, "fusion gain", 600, fusion_gain);
    report(7, "RMDT robustness", 600, rmdt_robustness);
    report(8, "determinism", 120, determinism);
    report(9, "streaming consistency", 10, streaming_consistency);

    std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
