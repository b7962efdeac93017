#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "clauseviz/formats.hpp"
#include "clauseviz/transport.hpp"
#include "support.hpp"

using namespace clauseviz;
using namespace clauseviz::cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

Result invoke(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
    std::ostringstream out, err;
    const int code = run(args, out, err, env_of(std::move(env)));
    return {code, out.str(), err.str()};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        write(dir / "f.cnf", "p cnf 4 3\n1 2 3 0\n-2 4 0\n1 -1 3 0\n");
        write(dir / "p.drat", "1 4 0\n2 3 0\nd -2 4 0\n3 4 0\n1 2 3 4 0\n");
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }

    testing_support::TempDir dir{"cli"};
};

}  // namespace

TEST_F(Cli, TransformWritesEdgeList) {
    const auto r = invoke({"transform", "--cnf", path("f.cnf"), "--reduction", "ring", "--out", path("edges.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "edges.txt"), "1 2 0.5\n1 3 0.5\n2 3 0.5\n2 4 1\n");
    EXPECT_NE(r.err.find("warning"), std::string::npos);  // dropped tautology
}

TEST_F(Cli, TransformAppliesProofAndPrintsStats) {
    const auto r = invoke({"transform", "--cnf", path("f.cnf"), "--proof", path("p.drat"), "--out", "-", "--format", "dot",
                           "--stats"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("graph vig {"), std::string::npos);
    const auto stats = nlohmann::json::parse(r.out.substr(r.out.rfind('{')));
    EXPECT_EQ(stats["proof_events"], 5);
    EXPECT_EQ(stats["unknown_deletes"], 0);
    EXPECT_EQ(stats["variables"], 4);
}

TEST_F(Cli, TransformMapAndPositions) {
    const auto r = invoke({"transform", "--cnf", path("f.cnf"), "--map-out", path("map.txt"), "--positions",
                           path("pos.txt"), "--contract-target", "2", "--layout-iterations", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream map(slurp(dir / "map.txt"));
    int lines = 0;
    for (std::string l; std::getline(map, l);) ++lines;
    EXPECT_EQ(lines, 4);
    EXPECT_FALSE(slurp(dir / "pos.txt").empty());
}

TEST_F(Cli, RenderWritesFramesAndManifest) {
    const auto r = invoke({"render", "--cnf", path("f.cnf"), "--proof", path("p.drat"), "--out", path("frames"),
                           "--frames", "10", "--width", "64", "--height", "48", "--layout-iterations", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    int pngs = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "frames")) pngs += e.path().extension() == ".png";
    EXPECT_EQ(pngs, 10);
    EXPECT_TRUE(std::filesystem::exists(dir / "frames" / "manifest.json"));
    EXPECT_NE(r.out.find("ffmpeg"), std::string::npos);
}

TEST_F(Cli, UnknownFlagIsUsageError) {
    const auto r = invoke({"transform", "--cnf", path("f.cnf"), "--bogus"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(invoke({"fly"}).code, 1);
    EXPECT_EQ(invoke({}).code, 1);
}

TEST_F(Cli, BadValuesAreUsageErrors) {
    EXPECT_EQ(invoke({"transform", "--cnf", path("f.cnf"), "--reduction", "star"}).code, 1);
    EXPECT_EQ(invoke({"transform", "--cnf", path("f.cnf"), "--seed", "abc"}).code, 1);
    EXPECT_EQ(invoke({"transform"}).code, 1);
    EXPECT_EQ(invoke({"render", "--cnf", path("f.cnf"), "--proof", path("p.drat"), "--out", path("o"), "--heat-k", "0"}).code, 1);
}

TEST_F(Cli, RuntimeFailuresExitTwo) {
    const auto missing = invoke({"transform", "--cnf", path("nope.cnf")});
    EXPECT_EQ(missing.code, 2);
    EXPECT_FALSE(missing.err.empty());
    write(dir / "bad.cnf", "p cnf 2 1\n1 x 0\n");
    EXPECT_EQ(invoke({"transform", "--cnf", path("bad.cnf")}).code, 2);
    std::uint16_t port;
    {
        ConsumerListener probe(Endpoint{"127.0.0.1", 0});
        port = probe.port();
    }
    EXPECT_EQ(invoke({"produce", "--proof", path("p.drat"), "--connect", "127.0.0.1:" + std::to_string(port)}).code, 2);
}

TEST_F(Cli, ProduceSendsProofOverTcp) {
    ConsumerListener listener(Endpoint{"127.0.0.1", 0});
    std::vector<ClauseEvent> got;
    std::thread consumer([&] { listener.serve_one([&](ClauseEvent e) { got.push_back(std::move(e)); }); });
    const auto r = invoke({"produce", "--proof", path("p.drat"), "--connect", "127.0.0.1:" + std::to_string(listener.port()),
                           "--stats"});
    consumer.join();
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["events_sent"], 5);
    EXPECT_EQ(got, read_drat_file(path("p.drat")));
}

// The transform's --format is used as the probe: edges vs dot output.
TEST_F(Cli, PrecedenceFlagEnvFileDefault) {
    write(dir / "cfg.json", R"({"format": "dot", "seed": 5})");
    const std::vector<std::string> base{"transform", "--cnf", path("f.cnf"), "--out", "-"};
    auto is_dot = [](const Result& r) { return r.out.rfind("graph vig", 0) == 0; };

    // default
    EXPECT_FALSE(is_dot(invoke(base)));
    // file beats default
    auto with_file = base;
    with_file.insert(with_file.end(), {"--config", path("cfg.json")});
    EXPECT_TRUE(is_dot(invoke(with_file)));
    // file named through the environment
    EXPECT_TRUE(is_dot(invoke(base, {{"CLAUSEVIZ_CONFIG", path("cfg.json")}})));
    // env beats file
    EXPECT_FALSE(is_dot(invoke(with_file, {{"CLAUSEVIZ_FORMAT", "edges"}})));
    // flag beats env and file
    auto with_flag = with_file;
    with_flag.insert(with_flag.end(), {"--format", "dot"});
    EXPECT_TRUE(is_dot(invoke(with_flag, {{"CLAUSEVIZ_FORMAT", "edges"}})));
    with_flag.back() = "edges";
    EXPECT_FALSE(is_dot(invoke(with_flag)));
}

TEST(Settings, SourcesAndNames) {
    testing_support::TempDir dir("settings");
    std::ofstream(dir / "c.json") << R"({"heat_k": 7, "include_deletions": true, "fps": 12})";
    auto check = [&](std::vector<std::string> args, std::map<std::string, std::string> env) {
        CLI::App app;
        auto* sub = app.add_subcommand("x");
        auto s = std::make_unique<Settings>(sub);
        s->option("heat-k", "1000", "");
        s->option("fps", "30", "");
        s->option("seed", "1", "");
        s->flag("include-deletions", "");
        args.insert(args.begin(), "x");
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        s->resolve(env_of(env));
        return s;
    };
    const std::string cfg = (dir / "c.json").string();
    auto s = check({"--config", cfg, "--fps", "60"}, {{"CLAUSEVIZ_HEAT_K", "9"}});
    EXPECT_EQ(s->count("fps"), 60u);
    EXPECT_EQ(s->source("fps"), "flag");
    EXPECT_EQ(s->count("heat-k"), 9u);
    EXPECT_EQ(s->source("heat-k"), "env");
    EXPECT_TRUE(s->boolean("include-deletions"));
    EXPECT_EQ(s->source("include-deletions"), "file");
    EXPECT_EQ(s->count("seed"), 1u);
    EXPECT_EQ(s->source("seed"), "default");
    EXPECT_EQ(Settings::env_name("heat-k"), "CLAUSEVIZ_HEAT_K");
    EXPECT_EQ(Settings::file_key("heat-k"), "heat_k");

    auto flagged = check({"--include-deletions"}, {});
    EXPECT_TRUE(flagged->boolean("include-deletions"));
    auto env_bool = check({}, {{"CLAUSEVIZ_INCLUDE_DELETIONS", "false"}});
    EXPECT_FALSE(env_bool->boolean("include-deletions"));
    EXPECT_THROW(check({}, {{"CLAUSEVIZ_INCLUDE_DELETIONS", "maybe"}})->boolean("include-deletions"), UsageError);
}
