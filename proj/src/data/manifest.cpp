#include "mmturn/data/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "mmturn/core/error.hpp"
#include "mmturn/io.hpp"

namespace mmturn::data {

using json = nlohmann::ordered_json;

std::string Utterance::text() const {
    std::string s;
    for (const auto& w : words) {
        if (!s.empty()) s += ' ';
        s += w.text;
    }
    return s;
}

std::size_t Manifest::word_count() const {
    std::size_t n = 0;
    for (const auto& c : conversations)
        for (const auto& u : c.utterances) n += u.words.size();
    return n;
}

namespace {

Vector vector_from(const json& j, std::size_t line, const char* what) {
    if (!j.is_array()) throw DataError(std::string(what) + " must be an array of numbers", line);
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw DataError(std::string(what) + " must be an array of numbers", line);
        v.push_back(x.get<double>());
    }
    return Vector(std::move(v));
}

template <typename T>
T required(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'", line);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw DataError(std::string("field '") + key + "' has the wrong type", line);
    }
}

ManifestHeader parse_header(const json& j, std::size_t line) {
    ManifestHeader h;
    h.schema_version = required<int>(j, "schema_version", line);
    if (h.schema_version != kSchemaVersion)
        throw DataError("unsupported schema_version " + std::to_string(h.schema_version) + " (expected " +
                            std::to_string(kSchemaVersion) + ")",
                        line);
    h.audio_width = j.value("audio_width", std::size_t{0});
    h.video_width = j.value("video_width", std::size_t{0});
    h.video_frames = j.value("n", kDefaultVideoFrames);
    h.audio_hop = j.value("audio_hop", h.audio_hop);
    if (!(h.audio_hop > 0.0)) throw DataError("audio_hop must be positive", line);
    if (h.video_frames == 0) throw DataError("n must be positive", line);
    return h;
}

Utterance parse_utterance(const json& j, ManifestHeader& header, std::size_t line) {
    Utterance u;
    u.conv_id = required<std::string>(j, "conv_id", line);
    u.utt_id = required<std::string>(j, "utt_id", line);
    u.speaker = required<std::string>(j, "speaker", line);
    if (!j.contains("words") || !j["words"].is_array()) throw DataError("missing array field 'words'", line);
    for (const auto& w : j["words"]) {
        WordFrame f;
        f.text = required<std::string>(w, "w", line);
        f.t_start = required<double>(w, "t_start", line);
        f.t_end = required<double>(w, "t_end", line);
        f.speaker = u.speaker;
        if (w.contains("label") && !w["label"].is_null()) {
            const auto label = parse_action(required<std::string>(w, "label", line));
            if (!label) throw DataError("unknown label '" + w["label"].get<std::string>() + "'", line);
            f.label = *label;
        }
        u.words.push_back(std::move(f));
    }
    if (j.contains("audio_frames") && !j["audio_frames"].is_null()) {
        std::vector<Vector> frames;
        for (const auto& f : j["audio_frames"]) {
            frames.push_back(vector_from(f, line, "audio frame"));
            if (header.audio_width == 0) header.audio_width = frames.back().size();
            if (frames.back().size() != header.audio_width)
                throw DataError("audio frame width " + std::to_string(frames.back().size()) + ", expected " +
                                    std::to_string(header.audio_width),
                                line);
        }
        u.audio_frames = std::move(frames);
    }
    if (j.contains("video_frames") && !j["video_frames"].is_null()) {
        std::vector<TimedFrame> frames;
        for (const auto& f : j["video_frames"]) {
            TimedFrame tf{required<double>(f, "t", line), vector_from(f.value("values", json::array()), line, "video frame")};
            if (header.video_width == 0) header.video_width = tf.values.size();
            if (tf.values.size() != header.video_width)
                throw DataError("video frame width " + std::to_string(tf.values.size()) + ", expected " +
                                    std::to_string(header.video_width),
                                line);
            frames.push_back(std::move(tf));
        }
        u.video_frames = std::move(frames);
    }
    return u;
}

void validate_utterance(const Utterance& u, std::size_t line) {
    if (u.words.empty()) throw DataError("utterance " + u.utt_id + " has no words", line);
    for (std::size_t i = 0; i < u.words.size(); ++i) {
        const auto& w = u.words[i];
        if (!(w.t_start <= w.t_end))
            throw DataError("utterance " + u.utt_id + " word " + std::to_string(i) + ": t_start > t_end", line);
        if (i > 0) {
            const auto& prev = u.words[i - 1];
            if (w.t_start < prev.t_start)
                throw DataError("utterance " + u.utt_id + ": word times decrease at word " + std::to_string(i), line);
            if (w.t_start < prev.t_end)
                throw DataError("utterance " + u.utt_id + ": words " + std::to_string(i - 1) + " and " +
                                    std::to_string(i) + " overlap",
                                line);
        }
    }
    if (u.video_frames) {
        for (std::size_t i = 1; i < u.video_frames->size(); ++i)
            if ((*u.video_frames)[i].t < (*u.video_frames)[i - 1].t)
                throw DataError("utterance " + u.utt_id + ": video frame times decrease", line);
    }
}

void add_speaker(Conversation& c, const std::string& speaker, std::size_t line) {
    if (std::find(c.speakers.begin(), c.speakers.end(), speaker) != c.speakers.end()) return;
    if (c.speakers.size() == 2)
        throw DataError("conversation " + c.conv_id + " has more than two speakers ('" + speaker + "')", line);
    c.speakers.push_back(speaker);
}

}  // namespace

Manifest parse_manifest(std::istream& in) {
    Manifest m;
    std::map<std::string, std::size_t> index;
    std::string text;
    std::size_t line = 0;
    bool seen_record = false;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw DataError(std::string("malformed JSON: ") + e.what(), line);
        }
        if (!j.is_object()) throw DataError("record is not an object", line);
        if (j.contains("schema_version")) {
            if (seen_record) throw DataError("header must precede utterance records", line);
            m.header = parse_header(j, line);
            seen_record = true;
            continue;
        }
        seen_record = true;
        Utterance u = parse_utterance(j, m.header, line);
        validate_utterance(u, line);
        auto [it, inserted] = index.try_emplace(u.conv_id, m.conversations.size());
        if (inserted) m.conversations.push_back(Conversation{u.conv_id, {}, {}});
        Conversation& c = m.conversations[it->second];
        add_speaker(c, u.speaker, line);
        c.utterances.push_back(std::move(u));
    }
    return m;
}

Manifest parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    return parse_manifest(in);
}

void validate(const Manifest& manifest) {
    for (const auto& c : manifest.conversations) {
        if (c.speakers.size() > 2) throw DataError("conversation " + c.conv_id + " has more than two speakers");
        for (const auto& u : c.utterances) {
            validate_utterance(u, 0);
            if (std::find(c.speakers.begin(), c.speakers.end(), u.speaker) == c.speakers.end())
                throw DataError("utterance " + u.utt_id + " speaker not registered in conversation " + c.conv_id);
        }
    }
}

void write_manifest(std::ostream& out, const Manifest& m) {
    json header = {{"schema_version", m.header.schema_version},
                   {"audio_width", m.header.audio_width},
                   {"video_width", m.header.video_width},
                   {"n", m.header.video_frames},
                   {"audio_hop", m.header.audio_hop}};
    out << header.dump() << '\n';
    for (const auto& c : m.conversations) {
        for (const auto& u : c.utterances) {
            json j;
            j["conv_id"] = u.conv_id;
            j["utt_id"] = u.utt_id;
            j["speaker"] = u.speaker;
            json words = json::array();
            for (const auto& w : u.words) {
                json jw = {{"w", w.text}, {"t_start", w.t_start}, {"t_end", w.t_end}};
                if (w.label) jw["label"] = std::string(action_name(*w.label));
                words.push_back(std::move(jw));
            }
            j["words"] = std::move(words);
            if (u.audio_frames) {
                json frames = json::array();
                for (const auto& f : *u.audio_frames) frames.push_back(f.values());
                j["audio_frames"] = std::move(frames);
            }
            if (u.video_frames) {
                json frames = json::array();
                for (const auto& f : *u.video_frames) frames.push_back({{"t", f.t}, {"values", f.values.values()}});
                j["video_frames"] = std::move(frames);
            }
            out << j.dump() << '\n';
        }
    }
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    std::ostringstream buf;
    write_manifest(buf, manifest);
    write_file_atomic(path, buf.str());
}

}  // namespace mmturn::data
