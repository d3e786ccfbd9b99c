#pragma once

#include "mmturn/data/samples.hpp"
#include "mmturn/data/synthetic.hpp"
#include "mmturn/model.hpp"

namespace fixture {

/// Small synthetic split with tiny networks, for tests that need a trained model quickly.
struct Small {
    mmturn::data::SyntheticConfig synth;
    mmturn::data::Manifest manifest;
    mmturn::data::Vocabulary vocab;
    std::vector<mmturn::data::Sample> samples;
    mmturn::ModelConfig model;

    explicit Small(std::size_t words, std::uint64_t seed, std::size_t width = 8) {
        synth.num_words = words;
        synth.seed = seed;
        synth.video_frames = 4;
        manifest = mmturn::data::gen_synthetic(synth).manifest;
        vocab = mmturn::data::Vocabulary(synth.vocabulary());
        model.audio_width = synth.audio_width;
        model.video_width = synth.video_width;
        model.encoder_hidden = width;
        model.feature_width = width;
        model.head_hidden = {width};
        model.rank = 2;
        model.fused_width = width;
        model.fusion_head_hidden = {width};
        model.video_frames = 4;
        model.audio_hop = synth.audio_hop;
        samples = mmturn::data::build_samples(manifest, vocab,
                                              mmturn::data::SampleOptions{model.video_frames, model.audio_hop});
    }

    mmturn::ModelBundle bundle(std::uint64_t seed = 7) const { return mmturn::ModelBundle::init(model, vocab, seed); }
};

}  // namespace fixture
