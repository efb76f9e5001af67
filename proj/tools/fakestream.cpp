#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "fakestream/config.hpp"
#include "fakestream/pheme.hpp"
#include "fakestream/run.hpp"

namespace fs = std::filesystem;
using namespace fakestream;

namespace {

std::string flag_name(std::string_view key) {
    std::string s(key);
    for (char& c : s)
        if (c == '_') c = '-';
    return "--" + s;
}

/// One `--some-key VALUE` option per config key, plus `--config FILE`.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;

    void attach(CLI::App& app) {
        app.add_option("-c,--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
        for (const auto& k : kConfigKeys) {
            std::string help(k.help);
            if (!k.choices.empty()) help += (help.empty() ? "" : " ") + std::string("{") + std::string(k.choices) + "}";
            if (!k.default_value.empty()) help += " [" + std::string(k.default_value) + "]";
            app.add_option(flag_name(k.name), values[std::string(k.name)], help);
        }
    }

    /// File values, then the output-directory environment override, then flags.
    RunConfig resolve(const CLI::App& app) const {
        RunConfig cfg = config_file.empty() ? RunConfig{} : RunConfig::from_file(config_file);
        if (const char* env = std::getenv("FAKESTREAM_OUTPUT_DIR"); env && *env) cfg.set("output_dir", env);
        for (const auto& k : kConfigKeys) {
            const std::string key(k.name);
            if (app.count(flag_name(k.name)) > 0) cfg.set(key, values.at(key));
        }
        cfg.resolve_implied();
        cfg.check_consistency();
        return cfg;
    }
};

int print_error(const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online fake-news stream classifier with per-prediction explanations"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    auto* run = app.add_subcommand("run", "prequential pass over a labeled stream, writing all artifacts");
    run_flags.attach(*run);

    ConfigFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "metrics-only run reporting seconds per sample");
    bench_flags.attach(*bench);

    std::string run_dir, tweet_id, format = "text", report_out;
    auto* explain = app.add_subcommand("explain", "explanation report for one event of a finished run");
    explain->add_option("-r,--run-dir", run_dir, "run output directory")->required();
    explain->add_option("-t,--tweet-id", tweet_id, "event to explain")->required();
    explain->add_option("-f,--format", format, "text, structured or html")
        ->check(CLI::IsMember({"text", "structured", "html"}));
    explain->add_option("-o,--output", report_out, "write the report to this file instead of stdout");

    std::string pheme_dir, events_out, convert_report;
    auto* convert = app.add_subcommand("convert", "PHEME thread directory to a line-delimited event file");
    convert->add_option("-p,--pheme", pheme_dir, "PHEME root directory")->required();
    convert->add_option("-o,--output", events_out, "event file to write")->required();
    convert->add_option("--report", convert_report, "conversion report path [<output>.report.json]");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed() || bench->parsed()) {
            const bool is_bench = bench->parsed();
            RunConfig cfg;
            try {
                cfg = (is_bench ? bench_flags : run_flags).resolve(is_bench ? *bench : *run);
            } catch (const ConfigError& e) {
                return print_error(e, 2);
            }
            RunOptions opts;
            opts.metrics_only = is_bench;
            const RunSummary s = run_to_directory(cfg, opts);
            if (is_bench) {
                std::printf("samples %llu  seconds %.3f  s/sample %.6f\n",
                            static_cast<unsigned long long>(s.report.samples), s.seconds, s.seconds_per_sample());
            }
            std::cout << s.report.to_json().dump(2) << '\n';
            return 0;
        }
        if (explain->parsed()) {
            const Explanation e = explain_from_run(run_dir, tweet_id);
            const std::string body = emit_report(e, *parse_report_format(format));
            if (report_out.empty())
                std::cout << body;
            else
                write_file(report_out, body);
            return 0;
        }
        if (convert->parsed()) {
            const pheme::Conversion conv = pheme::convert_directory(pheme_dir);
            std::ostringstream lines;
            pheme::write_events(conv.events, lines);
            write_file(events_out, lines.str());
            const std::string report_path = convert_report.empty() ? events_out + ".report.json" : convert_report;
            write_file(report_path, conv.report.to_json().dump(2) + "\n");
            std::printf("%zu events (%zu fake, %zu non_fake) from %zu users; %zu errors\n", conv.report.events,
                        conv.report.fake, conv.report.non_fake, conv.report.distinct_users, conv.report.errors.size());
            return 0;
        }
    } catch (const ConfigError& e) {
        return print_error(e, 2);
    } catch (const std::exception& e) {
        return print_error(e, 1);
    }
    return 0;
}
