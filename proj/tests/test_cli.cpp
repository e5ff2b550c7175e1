// End-to-end checks of the command-line surface: exit codes, output
// formats, determinism.  Runs the installed binary via popen.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pettis/json_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(PETTIS_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe)) result.output.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string write_config(const std::string& name, const std::string& text) {
    const std::string path = std::string("/tmp/pettis_cli_") + name + ".json";
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
    return path;
}

const char* kCombinedConfig = R"({
  "kmax": 20,
  "scheme": {"type": "combined", "terms": [
    {"weight": "1/1", "selector": {"type": "slope", "t": "1/3"}},
    {"weight": "1/4", "selector": {"type": "slope", "t": "1/2"}}
  ]}
})";

}  // namespace

TEST_CASE("verify subcommand passes and exits zero") {
    const auto r = run_cli("verify --lemma 3.2 --kmax 10");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"status\": \"pass\"") != std::string::npos);
}

TEST_CASE("missing required flags exit with the usage code") {
    CHECK(run_cli("verify").exit_code == 2);
    CHECK(run_cli("blowup").exit_code == 2);
    CHECK(run_cli("integrate --at 1/2").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("no-such-command").exit_code == 2);
    CHECK(run_cli("verify --lemma 9.9").exit_code == 2);
}

TEST_CASE("help exits clean") { CHECK(run_cli("--help").exit_code == 0); }

TEST_CASE("blowup with an infeasible truncation exits with the violation code") {
    const auto path = write_config("infeasible", R"({
      "kmax": 8,
      "scheme": {"type": "fn", "selector": {"type": "slope", "t": "1/3"}}
    })");
    const auto r = run_cli("blowup --f " + path + " --x 0 --M 50");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("infeasible") != std::string::npos);
}

TEST_CASE("blowup witness run is deterministic byte for byte") {
    const auto path = write_config("combined", kCombinedConfig);
    const std::string args = "blowup --f " + path + " --x 1/3 --M 5 --seed 9 --samples 8";
    const auto r1 = run_cli(args);
    const auto r2 = run_cli(args);
    CHECK(r1.exit_code == 0);
    CHECK(r1.output == r2.output);
    CHECK(r1.output.find("\"verdict\": \"pass\"") != std::string::npos);

    // the emitted report is valid JSON and every quotient beats the target
    const auto report = pettis::Json::parse(r1.output);
    CHECK(report.at("verdict") == "pass");
    for (const auto& sample : report.at("samples")) {
        const auto q = pettis::parse_rational(sample.at("quotient_sq").get<std::string>());
        CHECK(q > pettis::Rational(25));
    }
}

TEST_CASE("general-mode blowup runs from the command line") {
    const auto path = write_config("general", R"({
      "kmax": 8,
      "scheme": {"type": "combined", "terms": [
        {"weight": "1/1", "selector": {"type": "slope", "t": "1/3"}},
        {"weight": "1/32", "selector": {"type": "slope", "t": "1/2"}}
      ]}
    })");
    const auto r = run_cli("blowup --f " + path + " --x 1/3 --M 1/10 --mode general --cuts 0,7,9");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"mode\": \"general\"") != std::string::npos);
    CHECK(r.output.find("\"verdict\": \"pass\"") != std::string::npos);
}

TEST_CASE("construct emits carving and function configs") {
    const auto carving = run_cli("construct --sigma 011 --i 2 --kmax 6");
    CHECK(carving.exit_code == 0);
    CHECK(carving.output.find("\"sigma\": \"011\"") != std::string::npos);
    CHECK(carving.output.find("\"measure\"") != std::string::npos);

    const auto fn = run_cli("construct --slopes 1/3,1/2 --weights 1,1/4 --kmax 10");
    CHECK(fn.exit_code == 0);
    CHECK(fn.output.find("\"type\": \"combined\"") != std::string::npos);

    CHECK(run_cli("construct").exit_code == 2);
}

TEST_CASE("integrate reports the exact primitive components") {
    const auto path = write_config("integrate", R"({
      "kmax": 2,
      "scheme": {"type": "fn", "selector": {"type": "slope", "t": "1/3"}}
    })");
    const auto r = run_cli("integrate --f " + path + " --at 1/1");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"norm_sq\": \"49/36\"") != std::string::npos);
}

TEST_CASE("table renders csv rows") {
    const auto path = write_config("table", R"({
      "kmax": 12,
      "scheme": {"type": "fn", "selector": {"type": "slope", "t": "1/3"}}
    })");
    const auto r = run_cli("table --f " + path + " --x 0 --hmin 2^-6 --format csv");
    CHECK(r.exit_code == 0);
    CHECK(r.output.rfind("x,h,quot_sq_lo,quot_sq_hi,quot_sq_exact\n", 0) == 0);
}

TEST_CASE("family subcommand reports almost-disjointness") {
    const auto pass = run_cli("family --check-ad --ts 1/3,1/2 --depth 100");
    CHECK(pass.exit_code == 0);
    CHECK(pass.output.find("\"bound\": 6") != std::string::npos);
    CHECK(run_cli("family --check-ad --ts 1/3,1/3 --depth 10").exit_code == 2);
}

TEST_CASE("audit subcommand checks a carving path") {
    const auto r = run_cli("audit --tau 011 --kmax 8");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"status\": \"pass\"") != std::string::npos);
}

TEST_CASE("certify emits both integrability certificates") {
    const auto path = write_config("certify", R"({
      "kmax": 20,
      "scheme": {"type": "fn", "selector": {"type": "slope", "t": "1/3"}}
    })");
    const auto r = run_cli("certify --f " + path + " --threshold 100");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"pettis\"") != std::string::npos);
    CHECK(r.output.find("\"bochner\"") != std::string::npos);
    CHECK(r.output.find("divergent-at-truncation") != std::string::npos);
}

TEST_CASE("output lands in the requested file") {
    const std::string out = "/tmp/pettis_cli_out.json";
    std::remove(out.c_str());
    const auto r = run_cli("family --check-ad --ts 1/3,2/5 --depth 50 --out " + out);
    CHECK(r.exit_code == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"status\": \"pass\"") != std::string::npos);
}

TEST_CASE("bad config files exit with the usage code") {
    const auto path = write_config("corrupt", "{not json");
    CHECK(run_cli("integrate --f " + path + " --at 1/2").exit_code == 2);
    CHECK(run_cli("integrate --f /tmp/does_not_exist.json --at 1/2").exit_code == 2);
}
