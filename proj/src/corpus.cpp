#include "gwap/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "gwap/errors.hpp"

namespace gwap {

namespace {

[[noreturn]] void parse_fail(std::size_t line, std::string_view what)
{
    throw Error(ErrorCode::ParseError, fmt::format("line {}: {}", line, what));
}

bool blank(std::string_view s)
{
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key, std::size_t line)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    if (!j[key].is_string())
        parse_fail(line, fmt::format("\"{}\" must be a string", key));
    return sanitize_utf8(j[key].get<std::string>());
}

struct Parsed
{
    Snippet snippet;
    bool has_id = false;
};

Parsed parse_record(const std::string& text, std::size_t line, Modality modality)
{
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
        parse_fail(line, "not valid JSON");
    if (!j.is_object())
        parse_fail(line, "record must be a JSON object");

    Parsed out;
    out.snippet.modality = modality;
    if (j.contains("modality") && !j["modality"].is_null()) {
        if (!j["modality"].is_string())
            parse_fail(line, "\"modality\" must be a string");
        Modality declared{};
        try {
            declared = parse_modality(j["modality"].get<std::string>());
        } catch (const Error&) {
            parse_fail(line, "unknown modality");
        }
        if (declared != modality)
            throw Error(ErrorCode::WrongModalityPayload,
                        fmt::format("line {}: {} record in a {} corpus", line, to_string(declared), to_string(modality)));
    }

    const char* want = modality == Modality::text ? "text" : "media_uri";
    const char* other = modality == Modality::text ? "media_uri" : "text";
    if (j.contains(other))
        throw Error(ErrorCode::WrongModalityPayload,
                    fmt::format("line {}: \"{}\" is not a {} payload", line, other, to_string(modality)));
    const auto payload = optional_string(j, want, line);
    if (!payload)
        parse_fail(line, fmt::format("missing \"{}\"", want));
    if (blank(*payload))
        parse_fail(line, modality == Modality::text ? "empty text body" : "empty media reference");
    out.snippet.payload = *payload;

    if (auto id = optional_string(j, "id", line)) {
        if (blank(*id))
            parse_fail(line, "empty id");
        out.snippet.id = SnippetId(*id);
        out.has_id = true;
    }
    out.snippet.title = optional_string(j, "title", line);
    out.snippet.source = optional_string(j, "source", line);
    if (j.contains("active")) {
        if (!j["active"].is_boolean())
            parse_fail(line, "\"active\" must be true or false");
        out.snippet.active = j["active"].get<bool>();
    }
    try {
        check_snippet(out.snippet);
    } catch (const Error& e) {
        parse_fail(line, e.what());
    }
    return out;
}

} // namespace

IngestResult ingest_corpus(Store& store, std::istream& in, Modality modality)
{
    std::vector<Parsed> records;
    std::set<SnippetId> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text))
            continue;
        auto rec = parse_record(text, line, modality);
        if (rec.has_id && !seen.insert(rec.snippet.id).second)
            throw Error(ErrorCode::DuplicateId,
                        fmt::format("line {}: id '{}' appears more than once", line, rec.snippet.id.str()));
        records.push_back(std::move(rec));
    }
    if (in.bad())
        throw Error(ErrorCode::StorageFailure, "cannot read corpus");
    if (records.empty())
        return {};

    return store.transact([&](Txn& txn) {
        IngestResult result;
        for (auto& rec : records) {
            const auto& state = txn.state();
            if (rec.has_id) {
                if (auto it = state.snippets.find(rec.snippet.id); it != state.snippets.end()) {
                    if (it->second.modality != modality)
                        throw Error(ErrorCode::DuplicateId,
                                    fmt::format("id '{}' already belongs to a {} snippet", rec.snippet.id.str(),
                                                to_string(it->second.modality)));
                    ++result.skipped;
                    continue;
                }
            } else {
                auto n = state.snippet_seq + 1;
                SnippetId id;
                do {
                    id = SnippetId(fmt::format("{}-{:06}", to_string(modality), n++));
                } while (state.snippets.contains(id) || seen.contains(id));
                rec.snippet.id = id;
            }
            txn.emit(EventKind::snippet_added, {{"snippet", rec.snippet}});
            ++result.loaded;
        }
        return result;
    });
}

IngestResult ingest_corpus_file(Store& store, const std::string& path, Modality modality)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::NotFound, fmt::format("cannot open corpus file '{}'", path));
    return ingest_corpus(store, in, modality);
}

void set_snippet_active(Store& store, const SnippetId& id, bool active)
{
    store.transact([&](Txn& txn) {
        if (txn.state().snippet(id).active != active)
            txn.emit(EventKind::snippet_status, {{"snippet", id}, {"active", active}});
    });
}

std::size_t export_annotations(const Store& store, std::ostream& out)
{
    auto records = store.read([](const State& s) {
        std::vector<ExportRecord> all;
        for (auto m : kAllModalities) {
            auto part = s.partition(m).tallies.export_validated();
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    });
    std::stable_sort(records.begin(), records.end(), [](const ExportRecord& x, const ExportRecord& y) {
        return x.annotation.snippet_id < y.annotation.snippet_id;
    });
    for (const auto& r : records)
        out << format_export_line(r) << '\n';
    return records.size();
}

std::size_t dump_events(const Store& store, std::ostream& out)
{
    const auto events = store.events();
    for (const auto& e : events)
        out << serialize_event(e) << '\n';
    return events.size();
}

std::size_t restore_events(Store& store, std::istream& in)
{
    std::size_t applied = 0;
    std::size_t line = 0;
    std::string text;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text))
            continue;
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded())
            parse_fail(line, "not valid JSON");
        EventRecord e;
        try {
            e = j.get<EventRecord>();
        } catch (const nlohmann::json::exception& ex) {
            parse_fail(line, ex.what());
        }
        if (store.ingest_replayed(e))
            ++applied;
    }
    return applied;
}

} // namespace gwap
