#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ssm/cli.hpp"
#include "ssm/io.hpp"
#include "ssm/oracles.hpp"
#include "ssm/random.hpp"

using namespace ssm;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "ssm_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

double value_of(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + "=");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 1));
}

// hippo + discretize into a model directory, once.
std::string hippo_model() {
    static const std::string dir = [] {
        const Run h = run({"hippo", "--m", "100", "--out", path("a.clti")});
        REQUIRE(h.code == 0);
        const Run d = run({"discretize", "--a", path("a.clti"), "--delta", "5e-4", "--scheme", "bilinear", "--out-a",
                           path("abar.clti"), "--out-b", path("bbar.clti"), "--out-dir", path("hippo")});
        REQUIRE(d.code == 0);
        return path("hippo");
    }();
    return dir;
}

}  // namespace

TEST_CASE("discretize prints the diagonal extremes") {
    run({"hippo", "--m", "100", "--out", path("a2.clti")});
    const Run d = run({"discretize", "--a", path("a2.clti"), "--delta", "5e-4", "--scheme", "bilinear", "--out-a",
                       path("abar2.clti"), "--out-b", path("bbar2.clti")});
    REQUIRE(d.code == 0);
    CHECK(value_of(d.out, "diag_first") == doctest::Approx(0.999000499750125).epsilon(1e-12));
    CHECK(value_of(d.out, "diag_last") == doctest::Approx(0.9507437210436478).epsilon(1e-12));
    CHECK(io::read_matrix(path("abar2.clti")).rows() == 100);
    CHECK(io::read_matrix(path("bbar2.clti")).cols() == 1);
}

TEST_CASE("plan reproduces fifteen stages") {
    const Run p = run({"plan", "--model", hippo_model(), "--tol", "1e-12"});
    REQUIRE(p.code == 0);
    CHECK(p.out.find("stages=15 ") != std::string::npos);
    CHECK(p.out.find("heuristic") != std::string::npos);
    const Run lemma = run({"plan", "--model", hippo_model(), "--tol", "1e-12", "--criterion", "lemma"});
    CHECK(lemma.out.find("stages=18 ") != std::string::npos);
    const Run capped = run({"plan", "--model", hippo_model(), "--tol", "1e-12", "--max-stages", "3"});
    CHECK(capped.code == 1);
    CHECK_FALSE(capped.err.empty());
}

TEST_CASE("apply methods agree") {
    REQUIRE(run({"signal", "--length", "512", "--seed", "3", "--out", path("u.clti")}).code == 0);
    std::vector<SignalBlock> outputs;
    for (std::string method : {"recurrence", "conv", "cascade", "cascade-plr"}) {
        const std::string out = path("y_" + method + ".clti");
        const Run r = run({"apply", "--model", hippo_model(), "--method", method, "--input", path("u.clti"), "--out", out});
        REQUIRE(r.code == 0);
        outputs.push_back(io::read_signal(out));
    }
    CHECK(relative_l2_error(outputs[1], outputs[0]) <= 1e-12);
    CHECK(relative_l2_error(outputs[2], outputs[0]) <= 1e-10);
    CHECK(relative_l2_error(outputs[3], outputs[2]) <= 1e-8);
    const Run fixed = run({"apply", "--model", hippo_model(), "--input", path("u.clti"), "--out", path("y.clti"),
                           "--stages", "4"});
    CHECK(fixed.out.find("stages=4 ") != std::string::npos);
}

TEST_CASE("apply reports missing files") {
    const std::string missing = path("missing.clti");
    const Run r = run({"apply", "--model", hippo_model(), "--method", "cascade", "--input", missing, "--out", path("y.clti")});
    CHECK(r.code == 2);
    CHECK(r.err.find(missing) != std::string::npos);
    const Run bad_model = run({"plan", "--model", path("nowhere"), "--tol", "1e-6"});
    CHECK(bad_model.code == 2);
    CHECK(bad_model.err.find("nowhere") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"hippo", "--m", "10"}).code == 2);
    CHECK(run({"apply", "--model", "x", "--input", "y", "--out", "z", "--method", "fft"}).code == 2);
    CHECK(run({"apply", "--model", "x", "--input", "y", "--out", "z", "--tol", "1e-3", "--stages", "2"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("freq and plr") {
    const Run f = run({"freq", "--model", hippo_model(), "--stages", "16", "--grid", "32"});
    REQUIRE(f.code == 0);
    CHECK(f.out.find("max_error=") != std::string::npos);
    const Run p = run({"plr", "--a", path("abar.clti"), "--eps", "1e-10"});
    REQUIRE(p.code == 0);
    CHECK(p.out.find("max_rank=") != std::string::npos);
    const Run powers = run({"plr", "--a", path("abar.clti"), "--eps", "1e-10", "--powers", "3"});
    CHECK(powers.out.find("power=2 ") != std::string::npos);
}

TEST_CASE("bench writes one row per method and length") {
    const std::string csv = path("bench.csv");
    const Run b = run({"bench", "--model", hippo_model(), "--L", "64,256", "--methods", "cascade,recurrence,conv",
                       "--reps", "3", "--csv", csv});
    REQUIRE(b.code == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == io::kCsvHeader);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.rfind("recurrence,", 0) == 0) CHECK(line.back() == ',');
    }
    CHECK(rows == 6);
}

TEST_CASE("verify passes and is reproducible") {
    const Run a = run({"verify", "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out.find("FAIL") == std::string::npos);
    CHECK(a.out.find("PASS cascade-vs-recurrence") != std::string::npos);
    CHECK(a.out.find("PASS plr-vs-dense") != std::string::npos);
    const Run b = run({"verify", "--seed", "7"});
    CHECK(a.out == b.out);
    // An impossible tolerance must fail the cross-method checks.
    CHECK(run({"verify", "--tol", "1e-30"}).code == 1);
}
