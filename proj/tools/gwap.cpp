#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gwap/api.hpp"
#include "gwap/corpus.hpp"
#include "gwap/errors.hpp"
#include "gwap/reconcile.hpp"
#include "gwap/report.hpp"
#include "gwap/simulate.hpp"

using namespace gwap;

namespace {

ApiService* g_service = nullptr;

void on_signal(int)
{
    if (g_service)
        g_service->stop();
}

std::unique_ptr<EventLog> open_log(const std::string& path)
{
    if (path.empty())
        return std::make_unique<MemoryEventLog>();
    return std::make_unique<SqliteEventLog>(path);
}

EngineConfig engine_config(const std::string& path)
{
    if (path.empty())
        return {};
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::NotFound, fmt::format("cannot open engine config '{}'", path));
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorCode::ParseError, fmt::format("'{}' is not valid JSON", path));
    return validate_config(merge_config({}, j));
}

std::unique_ptr<Store> open_store(const std::string& path, const std::string& engine,
                                  std::shared_ptr<Clock> clock = std::make_shared<SystemClock>())
{
    return std::make_unique<Store>(open_log(path), engine_config(engine), std::move(clock));
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::StorageFailure, fmt::format("cannot write '{}'", path));
    out << text;
    if (!out)
        throw Error(ErrorCode::StorageFailure, fmt::format("cannot write '{}'", path));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mood annotation game service and operator tools"};
    app.require_subcommand(1);

    std::string store_path;
    std::string engine_path;
    app.add_option("--store", store_path, "SQLite event store (omit for an in-memory store)");
    app.add_option("--engine", engine_path, "JSON file of engine config overrides");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string config_path;
    std::optional<int> port;
    serve->add_option("--config", config_path, "Service config JSON file")->check(CLI::ExistingFile);
    serve->add_option("--port", port, "Override the configured port");

    auto* ingest = app.add_subcommand("ingest", "Load a line-delimited snippet corpus");
    std::string corpus_file;
    std::string modality_name = "text";
    ingest->add_option("--file", corpus_file, "Corpus file")->required();
    ingest->add_option("--modality", modality_name, "text, audio or video")->check(CLI::IsMember({"text", "audio", "video"}));

    auto* exp = app.add_subcommand("export", "Write validated annotations as JSON lines");
    std::string out_path = "-";
    exp->add_option("--out", out_path, "Output file, '-' for stdout");

    auto* report = app.add_subcommand("report", "Annotation statistics");
    std::string format = "table";
    report->add_option("--format", format, "table or records")->check(CLI::IsMember({"table", "records"}));

    auto* recon = app.add_subcommand("reconcile", "Recount cached state from the event log");

    auto* contrib = app.add_subcommand("contribution", "Expected snippets labelled per player");
    double throughput = 0;
    double hours = 0;
    contrib->add_option("--throughput", throughput, "Snippets per player-hour")->required();
    contrib->add_option("--hours", hours, "Average lifetime play in hours")->required();

    auto* sim = app.add_subcommand("simulate", "Play synthetic players through the engine");
    SimProfile profile;
    std::string dist_path;
    std::string sim_corpus;
    std::string sim_modality = "text";
    std::string sim_export;
    std::string sim_summary;
    sim->add_option("--players", profile.players, "Number of players")->required();
    sim->add_option("--games", profile.games_per_player, "Games per player")->required();
    sim->add_option("--dist", dist_path, "Label distribution JSON")->required();
    sim->add_option("--seed", profile.seed, "RNG seed")->required();
    sim->add_option("--snippets-per-game", profile.snippets_per_game, "Answers per game");
    sim->add_option("--corpus", sim_corpus, "Corpus to ingest first");
    sim->add_option("--modality", sim_modality, "text, audio or video")->check(CLI::IsMember({"text", "audio", "video"}));
    sim->add_option("--export", sim_export, "Also write the validated annotations here");
    sim->add_option("--summary", sim_summary, "Write the summary JSON here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) {
            ServiceConfig cfg = config_path.empty() ? ServiceConfig{} : load_service_config(config_path);
            if (!store_path.empty())
                cfg.store_path = store_path;
            if (!engine_path.empty())
                cfg.engine = engine_config(engine_path);
            if (port)
                cfg.port = *port;
            ApiService service(cfg);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << fmt::format("listening on {}:{}\n", cfg.bind, cfg.port);
            if (!service.listen()) {
                std::cerr << fmt::format("error: cannot bind {}:{}\n", cfg.bind, cfg.port);
                return 1;
            }
            g_service = nullptr;
        } else if (ingest->parsed()) {
            auto store = open_store(store_path, engine_path);
            const auto result = ingest_corpus_file(*store, corpus_file, parse_modality(modality_name));
            std::cout << fmt::format("loaded {} snippets ({} already present)\n", result.loaded, result.skipped);
        } else if (exp->parsed()) {
            auto store = open_store(store_path, engine_path);
            std::ostringstream out;
            const auto n = export_annotations(*store, out);
            write_output(out_path, out.str());
            if (out_path != "-")
                std::cerr << fmt::format("exported {} annotations\n", n);
        } else if (report->parsed()) {
            auto store = open_store(store_path, engine_path);
            const auto stats = stats_report(*store);
            if (format == "table")
                std::cout << format_stats_table(stats);
            else
                std::cout << nlohmann::json(stats).dump(2) << '\n';
        } else if (recon->parsed()) {
            auto store = open_store(store_path, engine_path);
            const auto result = reconcile(*store);
            std::cout << nlohmann::json(result).dump(2) << '\n';
            return result.clean() ? 0 : 2;
        } else if (contrib->parsed()) {
            std::cout << fmt::format("{}\n", expected_contribution(throughput, hours));
        } else if (sim->parsed()) {
            load_distribution_file(dist_path, profile);
            profile.modality = parse_modality(sim_modality);
            auto clock = std::make_shared<ManualClock>();
            auto store = open_store(store_path, engine_path, clock);
            if (const auto events = store->events(); !events.empty()) {
                const auto behind = events.back().at + 1000 - clock->now();
                if (behind > 0)
                    clock->advance(behind);
            }
            if (!sim_corpus.empty())
                ingest_corpus_file(*store, sim_corpus, profile.modality);
            const auto summary = simulate(*store, profile);
            write_output(sim_summary, nlohmann::json(summary).dump(2) + "\n");
            if (!sim_export.empty()) {
                std::ostringstream out;
                export_annotations(*store, out);
                write_output(sim_export, out.str());
            }
        }
    } catch (const Error& e) {
        std::cerr << fmt::format("error: {}: {}\n", wire_code(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << fmt::format("error: {}\n", e.what());
        return 1;
    }
    return 0;
}
