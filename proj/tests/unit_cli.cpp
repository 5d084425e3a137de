#include <doctest.h>

#include "projlab/cli.hpp"
#include "projlab/json_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>

using namespace projlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream o, e;
    int code = run_command(args, o, e);
    return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("projlab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("cli exit codes") {
    fs::path d = scratch("codes");
    const std::string od = d.string();
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"--out-dir", od, "build-block", "--eta", "1/2"}).code == kExitUsage);
    CHECK(cli({"--out-dir", od, "build-block", "--eps", "abc", "--eta", "1/2"}).code == kExitUsage);
    CHECK(cli({"--out-dir", od, "build-block", "--eps", "1/9", "--eta", "1/2", "--ambient-dim", "10"}).code ==
          kExitUsage);
    CHECK(cli({"--out-dir", od, "baseline"}).code == kExitUsage);
    CHECK(cli({"--out-dir", od, "build-five", "--dim", "3", "--blocks", "1"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);

    Outcome ok = cli({"--out-dir", od, "build-block", "--eps", "1/9", "--eta", "1/2"});
    CHECK(ok.code == kExitOk);
    CHECK(fs::exists(d / "block.json"));
    CHECK(cli({"--out-dir", od, "verify", "--certificate", (d / "block.json").string()}).code == kExitOk);
    CHECK(cli({"--out-dir", od, "verify", "--certificate", (d / "missing.json").string()}).code == kExitUsage);

    // explicit eta that breaks the window precondition: report written, exit 1
    Outcome bad = cli({"--out-dir", od, "assemble", "--eps", "0.95,0.9,0.85", "--eta-rule", "explicit", "--eta",
                       "0.9,0.9,0.9"});
    CHECK(bad.code == kExitBound);
    CHECK(fs::exists(d / "chain.json"));
    CHECK(bad.err.find("build_chain") != std::string::npos);
}

TEST_CASE("cli tampered certificate fails verification") {
    fs::path d = scratch("tamper");
    REQUIRE(cli({"--out-dir", d.string(), "build-block", "--eps", "1/9", "--eta", "1/2"}).code == kExitOk);
    json j = read_json_file((d / "block.json").string());
    j["achieved_error"] = "1.00000000000000000e-02";
    write_text_file((d / "bad.json").string(), dump_json(j));
    Outcome r = cli({"--out-dir", d.string(), "verify", "--certificate", (d / "bad.json").string()});
    CHECK(r.code == kExitBound);
    CHECK(r.err.find("achieved_error") != std::string::npos);
    json rep = read_json_file((d / "verify_report.json").string());
    CHECK_FALSE(rep["ok"].get<bool>());

    j["achieved_error"] = "2.00000000000000000e-01";  // edited upward
    write_text_file((d / "up.json").string(), dump_json(j));
    CHECK(cli({"--out-dir", d.string(), "verify", "--certificate", (d / "up.json").string()}).code == kExitBound);
}

TEST_CASE("cli output is deterministic and honors PROJLAB_OUT") {
    fs::path a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(cli({"--out-dir", a.string(), "run-orbit", "--blocks", "2"}).code == kExitOk);
    setenv("PROJLAB_OUT", b.string().c_str(), 1);
    REQUIRE(cli({"run-orbit", "--blocks", "2"}).code == kExitOk);
    unsetenv("PROJLAB_OUT");
    for (const char* f : {"orbit.csv", "orbit_report.json"})
        CHECK(read_text_file((a / f).string()) == read_text_file((b / f).string()));
    json rep = read_json_file((a / "orbit_report.json").string());
    CHECK(rep["ok"].get<bool>());
    CHECK(rep["config"]["blocks"] == 2);
}

TEST_CASE("cli config file with flag override") {
    fs::path d = scratch("config");
    write_text_file((d / "cfg.txt").string(), "# block settings\neps = 1/81\neta = 1/2\n");
    REQUIRE(cli({"--out-dir", d.string(), "build-block", "--config", (d / "cfg.txt").string(), "--eps", "1/9"})
                .code == kExitOk);
    json j = read_json_file((d / "block.json").string());
    CHECK(j["k"] == 11);  // 1/9 from the flag, not 1/81 from the file

    write_text_file((d / "flags.txt").string(), "von-neumann = true\niters = 5\n");
    REQUIRE(cli({"--out-dir", d.string(), "baseline", "--config", (d / "flags.txt").string()}).code == kExitOk);
    json bl = read_json_file((d / "baseline.json").string());
    CHECK(bl["config"]["iters"] == 5);
    CHECK(std::abs(bl["final_norm"].get<double>() - 1.0 / 32) < 1e-12);

    write_text_file((d / "bad.txt").string(), "no_such_key = 1\n");
    CHECK(cli({"--out-dir", d.string(), "prop-suite", "--config", (d / "bad.txt").string()}).code == kExitUsage);
}

TEST_CASE("cli dispatch and build-five") {
    fs::path d = scratch("five");
    write_text_file((d / "z.txt").string(), "0 0 1 0\n");
    Outcome r = cli({"--out-dir", d.string(), "dispatch", "--z", (d / "z.txt").string(), "--blocks", "2"});
    CHECK(r.code == kExitOk);
    json j = read_json_file((d / "dispatch.json").string());
    CHECK_FALSE(j["result"]["u"]["ran"].get<bool>());
    CHECK(j["result"]["verdict"].get<bool>());
    write_text_file((d / "odd.txt").string(), "1 2 3\n");
    CHECK(cli({"--out-dir", d.string(), "dispatch", "--z", (d / "odd.txt").string()}).code == kExitUsage);
    CHECK(cli({"--out-dir", d.string(), "build-five", "--dim", "4", "--blocks", "2"}).code == kExitOk);
}

TEST_CASE("cli binary exit status") {
    fs::path d = scratch("binary");
    const std::string base = std::string(PROJLAB_CLI_PATH) + " --out-dir " + d.string();
    auto status = [](const std::string& cmd) {
        int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status(base + " baseline --von-neumann --iters 3") == kExitOk);
    CHECK(status(base + " nonsense") == kExitUsage);
    CHECK(fs::exists(d / "baseline.csv"));
}
