#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

#include "test_util.hpp"

using nlohmann::json;
using ptawcet_test::model_path;

namespace {

struct CliRun {
    int code = -1;
    std::string out;  // stdout and stderr interleaved
};

// Runs the installed binary with the given arguments, capturing both streams.
CliRun run_cli(const std::string& args) {
    std::string cmd = std::string(PTAWCET_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliRun r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("validate reports zero violations on the reference model") {
    CliRun r = run_cli("validate " + model_path("example1.pta"));
    CHECK(r.code == 0);
    CHECK(r.out.find("0 violations") != std::string::npos);
}

TEST_CASE("an unbounded dwell exits with code two and names the location") {
    CliRun r = run_cli("analyze " + model_path("unbounded.pta"));
    CHECK(r.code == 2);
    CHECK(r.out.find("WCET may be unbounded") != std::string::npos);
    CHECK(r.out.find("Start") != std::string::npos);
}

TEST_CASE("structured analyze output carries the result in both modes") {
    for (const char* mode : {"accel", "baseline"}) {
        CAPTURE(mode);
        CliRun r = run_cli("analyze " + model_path("example1.pta") + " --json --mode " + mode);
        REQUIRE(r.code == 0);
        json j = json::parse(r.out);
        CHECK(j["mode"] == mode);
        CHECK(j["wcet"].get<double>() == doctest::Approx(15.0).epsilon(1e-12));
    }
}

TEST_CASE("compare mode cross-checks the two engines") {
    CliRun r = run_cli("analyze " + model_path("geometric_c.pta") + " --mode compare --json");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["rg"] == 13807);
    CHECK(j["rg_formula_check"] == 13807);
    double a = j["accelerated"]["wcet"].get<double>();
    double b = j["baseline"]["wcet"].get<double>();
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("dot export writes the annotated zone graph") {
    std::string dot = (std::filesystem::temp_directory_path() / "ptawcet_cli_test.dot").string();
    std::filesystem::remove(dot);
    CliRun r = run_cli("analyze " + model_path("geometric_c.pta") + " --json --dot " + dot);
    REQUIRE(r.code == 0);
    std::ifstream in(dot);
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.rfind("digraph", 0) == 0);
    CHECK(text.find("style=bold") != std::string::npos);
    CHECK(text.find("n = 13809") != std::string::npos);
    std::filesystem::remove(dot);
}

TEST_CASE("usage errors exit with code one") {
    CHECK(run_cli("analyze " + model_path("example1.pta") + " --delta 2").code == 1);
    CHECK(run_cli("analyze " + model_path("example1.pta") + " --mode turbo").code == 1);
    CHECK(run_cli("analyze").code == 1);
    CHECK(run_cli("frobnicate x").code == 1);
    CHECK(run_cli("analyze /no/such/file.pta").code == 1);
}

TEST_CASE("syntax errors name their position and exit with code one") {
    std::string bad = temp_file("ptawcet_cli_bad.pta", "pta \"bad\"\nloc A\n");
    CliRun r = run_cli("validate " + bad);
    CHECK(r.code == 1);
    CHECK(r.out.find("line 2, column 1") != std::string::npos);
    std::filesystem::remove(bad);
}

TEST_CASE("a model violating the assumptions exits with code one") {
    std::string bad = temp_file("ptawcet_cli_mixed.pta",
                                "pta \"mixed\"\n"
                                "clocks x\n"
                                "location A initial invariant x <= 1\n"
                                "location B final\n"
                                "location C final\n"
                                "edge A -> B action a weight 0.5\n"
                                "edge A -> C action b weight 0.5\n");
    CHECK(run_cli("validate " + bad).code == 1);
    CHECK(run_cli("analyze " + bad).code == 1);
    std::filesystem::remove(bad);
}

TEST_CASE("simulation output is reproducible for a fixed seed") {
    std::string args = "simulate " + model_path("example1.pta") + " --trials 500 --seed 9 --json";
    CliRun r1 = run_cli(args);
    CliRun r2 = run_cli(args);
    REQUIRE(r1.code == 0);
    CHECK(r1.out == r2.out);
    json j = json::parse(r1.out);
    CHECK(j["trials"] == 500);
    CHECK(j["mean"].get<double>() == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(j["terminated_fraction"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}
