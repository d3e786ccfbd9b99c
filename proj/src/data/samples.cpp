#include "mmturn/data/samples.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "json.hpp"
#include "mmturn/core/error.hpp"

namespace mmturn::data {

using json = nlohmann::ordered_json;

ModalityMask Sample::available() const {
    return {inputs[0].has_value(), inputs[1].has_value(), inputs[2].has_value()};
}

std::size_t audio_frames_through(double t0, double t_end, double hop) {
    const double span = (t_end - t0) / hop;
    if (span <= 0.0) return 0;
    // tolerance absorbs timestamps that are sums of hop-multiples
    return static_cast<std::size_t>(std::ceil(span - 1e-6));
}

std::vector<Sample> build_samples(const Utterance& utt, const Vocabulary& vocab, const SampleOptions& options) {
    std::vector<Sample> out;
    out.reserve(utt.words.size());
    std::vector<Vector> video_values;
    if (utt.video_frames) {
        video_values.reserve(utt.video_frames->size());
        for (const auto& f : *utt.video_frames) video_values.push_back(f.values);
    }
    TextInput text;
    std::vector<std::string> words;
    for (std::size_t i = 0; i < utt.words.size(); ++i) {
        const auto& w = utt.words[i];
        if (!w.label) throw DataError("utterance " + utt.utt_id + " word " + std::to_string(i) + " is unlabeled");
        text.tokens.push_back(vocab.id(w.text));
        words.push_back(w.text);

        Sample s;
        s.conv_id = utt.conv_id;
        s.utt_id = utt.utt_id;
        s.word_index = i;
        s.words = words;
        s.label = *w.label;
        s.inputs[0] = text;

        if (utt.audio_frames && !utt.audio_frames->empty()) {
            const std::size_t count =
                std::min(audio_frames_through(utt.start(), w.t_end, options.audio_hop), utt.audio_frames->size());
            if (count > 0) s.inputs[1] = AudioInput{{utt.audio_frames->begin(), utt.audio_frames->begin() + count}};
        }
        if (utt.video_frames) {
            std::size_t available = 0;
            while (available < utt.video_frames->size() && (*utt.video_frames)[available].t <= w.t_end) ++available;
            if (available > 0) {
                s.inputs[2] = make_video_window(std::span<const Vector>(video_values.data(), available),
                                                options.video_frames);
            } else if (!video_values.empty()) {
                // video starts later in the utterance: the window is all padding
                VideoInput pad;
                pad.frames.assign(options.video_frames, video_values.front());
                pad.padded = options.video_frames;
                s.inputs[2] = std::move(pad);
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sample> build_samples(const Manifest& manifest, const Vocabulary& vocab) {
    return build_samples(manifest, vocab, SampleOptions{manifest.header.video_frames, manifest.header.audio_hop});
}

std::vector<Sample> build_samples(const Manifest& manifest, const Vocabulary& vocab, const SampleOptions& options) {
    std::vector<Sample> out;
    for (const auto& c : manifest.conversations)
        for (const auto& u : c.utterances) {
            auto s = build_samples(u, vocab, options);
            std::move(s.begin(), s.end(), std::back_inserter(out));
        }
    return out;
}

std::vector<FeatureRecord> read_feature_records(std::istream& in) {
    std::vector<FeatureRecord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(text);
            FeatureRecord r;
            r.utt_id = j.at("utt_id").get<std::string>();
            r.word_idx = j.at("word_idx").get<std::size_t>();
            r.modality = parse_modality(j.at("modality").get<std::string>());
            const auto values = j.at("values").get<std::vector<double>>();
            const auto dim = j.value("dim", values.size());
            if (dim != values.size())
                throw DataError("feature record declares dim " + std::to_string(dim) + " but has " +
                                    std::to_string(values.size()) + " values",
                                line);
            r.values = Vector(values);
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed feature record: ") + e.what(), line);
        } catch (const UsageError& e) {
            throw DataError(e.what(), line);
        }
    }
    return out;
}

std::vector<FeatureRecord> read_feature_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open feature file " + path.string());
    return read_feature_records(in);
}

void write_feature_records(std::ostream& out, std::span<const FeatureRecord> records) {
    for (const auto& r : records) {
        json j = {{"utt_id", r.utt_id},
                  {"word_idx", r.word_idx},
                  {"modality", std::string(1, modality_letter(r.modality))},
                  {"dim", r.values.size()},
                  {"values", r.values.values()}};
        out << j.dump() << '\n';
    }
}

Vector load_precomputed(const FeatureRecord& record, std::size_t expected_width) {
    if (record.values.size() != expected_width)
        throw DimensionError("precomputed " + std::string(modality_name(record.modality)) + " feature for " +
                                 record.utt_id + "#" + std::to_string(record.word_idx),
                             expected_width, record.values.size());
    if (!all_finite(record.values.span()))
        throw DataError("precomputed feature for " + record.utt_id + "#" + std::to_string(record.word_idx) +
                        " has non-finite values");
    return record.values;
}

std::size_t attach_precomputed(std::span<Sample> samples, std::span<const FeatureRecord> records,
                               std::size_t expected_width) {
    std::map<std::tuple<std::string, std::size_t, int>, const FeatureRecord*> index;
    for (const auto& r : records) index[{r.utt_id, r.word_idx, static_cast<int>(r.modality)}] = &r;
    std::size_t updated = 0;
    for (auto& s : samples) {
        bool touched = false;
        for (Modality m : kAllModalities) {
            const auto it = index.find({s.utt_id, s.word_index, static_cast<int>(m)});
            if (it == index.end()) continue;
            s.inputs[static_cast<std::size_t>(m)] = PrecomputedFeature{load_precomputed(*it->second, expected_width)};
            touched = true;
        }
        if (touched) ++updated;
    }
    return updated;
}

}  // namespace mmturn::data
