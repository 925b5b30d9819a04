#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>

#include "gwap/store.hpp"

namespace gwap {

struct IngestResult
{
    std::size_t loaded = 0;
    std::size_t skipped = 0;  // ids already present in the store
};

/// Loads a line-delimited JSON corpus. Each non-blank line is an object with
/// "text" (text modality) or "media_uri" (audio, video), and optionally
/// "id", "modality", "title", "source" and "active". The whole file is
/// validated before anything is written, and all new snippets land in one
/// transaction.
///
/// Throws ParseError (message starts with "line N:"), DuplicateId for an id
/// repeated within the file, WrongModalityPayload.
IngestResult ingest_corpus(Store& store, std::istream& in, Modality modality);

IngestResult ingest_corpus_file(Store& store, const std::string& path, Modality modality);

/// Activates or retires a snippet. Throws UnknownSnippet.
void set_snippet_active(Store& store, const SnippetId& id, bool active);

/// Writes every validated annotation, one JSON object per line, ordered by
/// snippet id then descending share. Returns the number of lines.
std::size_t export_annotations(const Store& store, std::ostream& out);

/// Full event log, one serialized record per line.
std::size_t dump_events(const Store& store, std::ostream& out);

/// Replays a dump into the store; records already present are skipped.
/// Returns the number of records applied.
std::size_t restore_events(Store& store, std::istream& in);

} // namespace gwap
