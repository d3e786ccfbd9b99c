#pragma once

#include <filesystem>
#include <iosfwd>

#include "mmturn/data/schema.hpp"

namespace mmturn::data {

/// JSON Lines: an optional header record {schema_version, audio_width, video_width, n,
/// audio_hop} followed by one record per utterance
/// {conv_id, utt_id, speaker, words: [{w, t_start, t_end, label?}], audio_frames?, video_frames?}.
/// Utterances are grouped into conversations by conv_id in order of first appearance.
/// Throws DataError (with the line number) on malformed records or invariant violations.
Manifest parse_manifest(std::istream& in);
Manifest parse_manifest(const std::filesystem::path& path);

void write_manifest(std::ostream& out, const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Checks every Conversation/Utterance invariant; throws DataError.
void validate(const Manifest& manifest);

}  // namespace mmturn::data
