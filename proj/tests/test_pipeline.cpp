#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;
using namespace fakestream;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result cli(const std::string& args, const fs::path& scratch, const std::string& env = "") {
    const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    const std::string cmd = env + " '" + std::string(FAKESTREAM_CLI) + "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

/// Every file under `dir` except timings, keyed by relative path.
std::map<std::string, std::string> artifacts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
        out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

class Pipeline : public ::testing::Test {
protected:
    void SetUp() override {
        fixtures::StreamShape shape;
        shape.events = 240;
        fixtures::write_stream(fixtures::synthetic_stream(shape), dir_ / "stream.jsonl");
        first_id_ = fixtures::synthetic_stream(shape)[150].tweet_id;
    }

    std::string run_args(const std::string& out, const std::string& extra = "") const {
        return "run --input '" + (dir_ / "stream.jsonl").string() + "' --output-dir '" + (dir_ / out).string() +
               "' --classifier htc --htc-grace-period 30 --explain-every 40 --snapshot-every 100 " + extra;
    }

    fixtures::TempDir dir_{"pipeline"};
    std::string first_id_;
};

}  // namespace

TEST_F(Pipeline, RunWritesArtifactsDeterministically) {
    ASSERT_EQ(cli(run_args("a"), dir_.path()).code, 0);
    const auto r = cli(run_args("b"), dir_.path());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto a = artifacts(dir_ / "a"), b = artifacts(dir_ / "b");
    for (const char* f : {"report.json", "series.csv", "config.resolved.txt", "load_report.json", "features.json",
                          "lexicon.json", "explanations/index.json", "snapshots/snapshot_0.bin",
                          "snapshots/snapshot_100.bin", "snapshots/snapshot_240.bin"})
        EXPECT_TRUE(a.contains(f)) << f;
    EXPECT_TRUE(fs::exists(dir_ / "a" / "timing.json"));
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [name, bytes] : a) {
        if (name == "config.resolved.txt") continue;  // echoes the output directory
        EXPECT_EQ(bytes, b.at(name)) << name;
    }
    const auto index = json::parse(a.at("explanations/index.json"));
    EXPECT_EQ(index.size(), 6u);
    for (const auto& row : index)
        for (const auto& f : row["files"]) EXPECT_TRUE(a.contains("explanations/" + f.get<std::string>())) << f;
    const auto report = json::parse(r.out);
    EXPECT_EQ(report["samples"], 240);
    EXPECT_EQ(report["classifier"], "htc");
}

TEST_F(Pipeline, ExplainReproducesTheRunReport) {
    ASSERT_EQ(cli(run_args("run", "--explain-format structured"), dir_.path()).code, 0);
    const auto index = json::parse(slurp(dir_ / "run" / "explanations" / "index.json"));
    const std::string id = index[3]["tweet_id"];
    const auto r = cli("explain -r '" + (dir_ / "run").string() + "' -t " + id + " -f structured", dir_.path());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, slurp(dir_ / "run" / "explanations" / (id + ".json")));

    for (const char* fmt : {"text", "html"}) {
        const auto f = cli("explain -r '" + (dir_ / "run").string() + "' -t " + first_id_ + " -f " + fmt, dir_.path());
        ASSERT_EQ(f.code, 0) << f.err;
        EXPECT_NE(f.out.find(std::string(fmt) == "html" ? "<section id=\"lexicon\">" : "[3] Lexicon elements"),
                  std::string::npos);
    }
}

TEST_F(Pipeline, ExplainUnknownIdFails) {
    ASSERT_EQ(cli(run_args("run"), dir_.path()).code, 0);
    const auto r = cli("explain -r '" + (dir_ / "run").string() + "' -t 123nope", dir_.path());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("123nope"), std::string::npos);
}

TEST_F(Pipeline, InvalidConfigIsAFieldLevelError) {
    const auto r = cli(run_args("bad", "--k 0"), dir_.path());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("'k'"), std::string::npos);
    std::ofstream(dir_ / "bad.conf") << "no_such_key = 1\n";
    const auto f = cli("run --config '" + (dir_ / "bad.conf").string() + "'", dir_.path());
    EXPECT_EQ(f.code, 2);
    EXPECT_NE(f.err.find("no_such_key"), std::string::npos);
}

TEST_F(Pipeline, MissingInputFails) {
    const auto r = cli("run --input '" + (dir_ / "absent.jsonl").string() + "' --output-dir '" + (dir_ / "x").string() + "'",
                       dir_.path());
    EXPECT_NE(r.code, 0);
}

TEST_F(Pipeline, ConfigFileFlagsAndEnvironment) {
    std::ofstream(dir_ / "run.conf") << "input = " << (dir_ / "stream.jsonl").string()
                                     << "\nclassifier = gnb\nfeature_set = A\noutput_dir = " << (dir_ / "from_file").string()
                                     << "\n";
    const auto r = cli("run --config '" + (dir_ / "run.conf").string() + "' --feature-set B", dir_.path(),
                       "FAKESTREAM_OUTPUT_DIR='" + (dir_ / "from_env").string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(fs::exists(dir_ / "from_file"));
    const auto echo = slurp(dir_ / "from_env" / "config.resolved.txt");
    EXPECT_NE(echo.find("classifier = gnb\n"), std::string::npos);
    EXPECT_NE(echo.find("feature_set = B\n"), std::string::npos);
    EXPECT_NE(echo.find("explain_k = 5\n"), std::string::npos);
    // The echo alone reproduces the run.
    const auto again = cli("run --config '" + (dir_ / "from_env" / "config.resolved.txt").string() + "' --output-dir '" +
                               (dir_ / "replay").string() + "'",
                           dir_.path());
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(slurp(dir_ / "replay" / "report.json"), slurp(dir_ / "from_env" / "report.json"));
}

TEST_F(Pipeline, WindowFraction) {
    const auto r = cli(run_args("w", "--window-fraction 0.2"), dir_.path());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(slurp(dir_ / "w" / "report.json"));
    EXPECT_EQ(report["window"], "fraction:0.2");
    EXPECT_EQ(report["window_samples"], 48);
}

TEST_F(Pipeline, BenchIsMetricsOnly) {
    const auto r = cli("bench --input '" + (dir_ / "stream.jsonl").string() + "' --output-dir '" + (dir_ / "bench").string() +
                           "' --classifier gnb",
                       dir_.path());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("s/sample"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "bench" / "report.json"));
    EXPECT_FALSE(fs::exists(dir_ / "bench" / "snapshots"));
}

TEST_F(Pipeline, ConvertCommand) {
    fixtures::write_pheme_tree(dir_ / "pheme", {});
    const auto r = cli("convert -p '" + (dir_ / "pheme").string() + "' -o '" + (dir_ / "events.jsonl").string() + "'",
                       dir_.path());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("80 events (30 fake, 50 non_fake)"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "events.jsonl.report.json"));
    const auto first = slurp(dir_ / "events.jsonl");
    ASSERT_EQ(cli("convert -p '" + (dir_ / "pheme").string() + "' -o '" + (dir_ / "events.jsonl").string() + "'",
                  dir_.path()).code, 0);
    EXPECT_EQ(slurp(dir_ / "events.jsonl"), first);

    fs::create_directories(dir_ / "empty");
    EXPECT_NE(cli("convert -p '" + (dir_ / "empty").string() + "' -o '" + (dir_ / "e.jsonl").string() + "'", dir_.path()).code,
              0);
}
