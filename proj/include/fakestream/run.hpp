#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fakestream/config.hpp"
#include "fakestream/engine.hpp"
#include "fakestream/explain.hpp"
#include "fakestream/ingest.hpp"
#include "fakestream/snapshot.hpp"

namespace fakestream {

namespace fs = std::filesystem;

inline constexpr const char* kConfigEcho = "config.resolved.txt";

inline void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

[[nodiscard]] inline std::vector<ReportFormat> report_formats(const std::string& choice) {
    if (choice == "all") return {ReportFormat::text, ReportFormat::structured, ReportFormat::html};
    if (auto f = parse_report_format(choice)) return {*f};
    throw ConfigError("unknown report format: " + choice);
}

[[nodiscard]] inline std::set<std::string> read_id_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read id list: " + path.string());
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        const std::string id = detail::trim(line);
        if (!id.empty() && id[0] != '#') ids.insert(id);
    }
    return ids;
}

struct RunOptions {
    bool metrics_only = false;  ///< no explanations, snapshots or audit exports
};

struct RunSummary {
    RunReport report;
    LoadReport load;
    std::uint64_t explanations = 0;
    double seconds = 0.0;
    [[nodiscard]] double seconds_per_sample() const {
        return report.samples ? seconds / static_cast<double>(report.samples) : 0.0;
    }
};

/// Engine and runner for a loaded stream under `cfg`.
[[nodiscard]] inline PrequentialRunner make_runner(const RunConfig& cfg, const LoadedStream& stream,
                                                   std::shared_ptr<const TextResources> resources) {
    const auto n = static_cast<std::uint64_t>(stream.events.size());
    Engine engine(cfg.engine_config(n, stream.report.fake, stream.report.non_fake), std::move(resources));
    return PrequentialRunner(std::move(engine), cfg.window(), n, static_cast<std::uint64_t>(cfg.integer("series_every")));
}

[[nodiscard]] inline std::shared_ptr<const TextResources> load_resources(const RunConfig& cfg) {
    return std::make_shared<const TextResources>(TextResources::load(cfg.resource_paths()));
}

/// Full prequential pass; writes every artifact under `cfg.output_dir`.
inline RunSummary run_to_directory(const RunConfig& cfg, const RunOptions& opts = {}) {
    cfg.check_consistency();
    if (cfg.get("input").empty()) throw ConfigError("config key 'input': required");
    const fs::path out_dir = cfg.get("output_dir");
    LoadedStream stream = read_stream(fs::path(cfg.get("input")));
    if (stream.report.unlabeled > 0)
        throw Error("input has " + std::to_string(stream.report.unlabeled) + " unlabeled events");

    fs::create_directories(out_dir);
    write_file(out_dir / kConfigEcho, cfg.resolved_text());
    write_file(out_dir / "load_report.json", stream.report.to_json().dump(2) + "\n");

    auto resources = load_resources(cfg);
    PrequentialRunner runner = make_runner(cfg, stream, resources);
    const auto n = static_cast<std::uint64_t>(stream.events.size());

    const std::uint64_t explain_every = static_cast<std::uint64_t>(cfg.integer("explain_every"));
    std::set<std::string> explain_ids;
    if (!cfg.get("explain_ids").empty()) explain_ids = read_id_list(cfg.get("explain_ids"));
    const auto formats = report_formats(cfg.get("explain_format"));
    const std::uint64_t snapshot_every = static_cast<std::uint64_t>(cfg.integer("snapshot_every"));

    RunSummary summary;
    summary.load = stream.report;
    nlohmann::json index = nlohmann::json::array();
    if (!opts.metrics_only) save_snapshot(runner, n, "", snapshot_path(out_dir, 0));

    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
        const TweetEvent& ev = stream.events[i];
        const bool want = !opts.metrics_only &&
                          ((explain_every > 0 && (i + 1) % explain_every == 0) || explain_ids.contains(ev.tweet_id));
        runner.step(ev, want);
        if (want) {
            const Explanation& e = *runner.last_explanation();
            nlohmann::json files = nlohmann::json::array();
            for (auto f : formats) {
                const std::string name = ev.tweet_id + std::string(report_extension(f));
                write_file(out_dir / "explanations" / name, emit_report(e, f));
                files.push_back(name);
            }
            index.push_back({{"tweet_id", ev.tweet_id}, {"sample", i + 1}, {"label", label_name(e.label)},
                             {"files", files}});
            ++summary.explanations;
        }
        if (!opts.metrics_only && snapshot_every > 0 && (i + 1) % snapshot_every == 0)
            save_snapshot(runner, n, ev.tweet_id, snapshot_path(out_dir, i + 1));
    }
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summary.report = runner.report();

    write_file(out_dir / "report.json", summary.report.to_json().dump(2) + "\n");
    write_file(out_dir / "series.csv", series_csv(runner.series()));
    write_file(out_dir / "timing.json",
               nlohmann::json{{"samples", summary.report.samples},
                              {"seconds", summary.seconds},
                              {"seconds_per_sample", summary.seconds_per_sample()}}
                       .dump(2) +
                   "\n");
    if (!opts.metrics_only) {
        const Engine& eng = runner.engine();
        write_file(out_dir / "features.json", eng.registry().dictionary().dump(2) + "\n");
        if (eng.config().feature_set == FeatureSet::C)
            write_file(out_dir / "lexicon.json", eng.lexicon().export_ranked().dump(2) + "\n");
        write_file(out_dir / "explanations" / "index.json", index.dump(2) + "\n");
        if (snapshot_every == 0 || n % snapshot_every != 0)
            save_snapshot(runner, n, stream.events.empty() ? "" : stream.events.back().tweet_id,
                          snapshot_path(out_dir, n));
    }
    return summary;
}

class UnknownTweet : public Error {
public:
    explicit UnknownTweet(const std::string& id) : Error("unknown tweet id: " + id), id_(id) {}
    [[nodiscard]] const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

/// Rebuilds the explanation of one event from a run directory: resumes the
/// nearest snapshot taken before it and replays the stream up to it.
[[nodiscard]] inline Explanation explain_from_run(const fs::path& run_dir, const std::string& tweet_id) {
    const fs::path echo = run_dir / kConfigEcho;
    if (!fs::exists(echo)) throw Error("not a run directory (missing " + std::string(kConfigEcho) + "): " + run_dir.string());
    const RunConfig cfg = RunConfig::from_file(echo);
    LoadedStream stream = read_stream(fs::path(cfg.get("input")));
    std::optional<std::size_t> pos;
    for (std::size_t i = 0; i < stream.events.size(); ++i)
        if (stream.events[i].tweet_id == tweet_id) {
            pos = i;
            break;
        }
    if (!pos) throw UnknownTweet(tweet_id);

    auto resources = load_resources(cfg);
    std::unique_ptr<PrequentialRunner> runner;
    std::uint64_t start = 0;
    if (auto snap = nearest_snapshot(run_dir, *pos)) {
        runner = load_snapshot(snapshot_path(run_dir, *snap), resources).runner;
        start = *snap;
    } else {
        runner = std::make_unique<PrequentialRunner>(make_runner(cfg, stream, resources));
    }
    for (std::size_t i = start; i < *pos; ++i) runner->step(stream.events[i]);
    runner->step(stream.events[*pos], true);
    return *runner->last_explanation();
}

}  // namespace fakestream
