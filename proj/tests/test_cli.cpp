// Drives the symfr binary end to end: exit codes, report contents, CSV shapes.
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SYMFR_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("symfr_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.emplace_back();
        rows.push_back(row);
    }
    return rows;
}

// every bit present in a z2.json
std::vector<int> bits(const json& z) {
    std::vector<int> out{z["graf_porta"]["bit"].get<int>(), z["trim"]["bit"].get<int>()};
    for (const char* k : {"geometric", "fmp", "prodan", "pfaffian", "crossing"})
        if (z.contains(k)) out.push_back(z[k]["bit"].get<int>());
    return out;
}

}  // namespace

TEST_CASE("verify: trivial model passes") {
    const auto d = scratch("verify_trivial");
    const Run r = run("verify --model trivial --m 2 --N 4 --grid 16 --out " + d.string());
    CHECK(r.code == 0);
    const json j = load(d / "verify.json");
    CHECK(j["assumptions"]["pass"].get<bool>());
    CHECK(j["command"] == "verify");
}

TEST_CASE("verify: doubled QWZ u=1 at 64 passes") {
    const auto d = scratch("verify_qwz");
    const Run r = run("verify --model doubled_qwz --u 1 --grid 64 --out " + d.string());
    CHECK(r.code == 0);
    const json a = load(d / "verify.json")["assumptions"];
    CHECK(a["m"] == 2);
    CHECK(a["rank"].get<double>() < 1e-10);
}

TEST_CASE("verify: imported model file") {
    const auto d = scratch("verify_file");
    const Run r = run(std::string("verify --model-file ") + SYMFR_DATA_DIR + "/doubled_qwz_u1.model --grid 32 --out " +
                      d.string());
    CHECK(r.code == 0);
}

TEST_CASE("verify: broken model file exits 2 with a schema message") {
    const auto d = scratch("verify_broken");
    {
        std::ofstream f(d / "broken.model");
        f << "[model]\nN = 4\nd = 2\n\n[term.1]\nn = 0 0\nre = 1 2 3\n";
    }
    const Run r = run("verify --model-file " + (d / "broken.model").string() + " --out " + d.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("SchemaError") != std::string::npos);
}

TEST_CASE("input errors exit 2") {
    const auto d = scratch("input_errors");
    CHECK(run("verify --model trivial --grid 30 --out " + d.string()).code == 2);
    CHECK(run("verify --model trivial --tol-herm -1 --out " + d.string()).code == 2);
    CHECK(run("verify --model nosuch --out " + d.string()).code == 2);
    CHECK(run("verify --out " + d.string()).code == 2);  // no model source
    CHECK(run("nosuchcommand").code == 2);
    CHECK(run("verify --model trivial --model-file x.model --out " + d.string()).code == 2);
}

TEST_CASE("config file drives a run; unknown sections are rejected") {
    const auto d = scratch("config");
    const auto ini = d / "run.ini";
    {
        std::ofstream f(ini);
        f << "[run]\ncommand = sweep\nout = " << d.string() << "\n\n[model]\nbuiltin = doubled_qwz\n\n[grid]\nn1 = 16\nn2 = 16\n\n[sweep]\nvalues = 3\n";
    }
    CHECK(run("sweep --config " + ini.string()).code == 0);
    const auto rows = csv(d / "sweep.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] == "ok");
    CHECK(rows[1][3] == "0");

    {
        std::ofstream f(ini, std::ios::app);
        f << "\n[extra]\nx = 1\n";
    }
    const Run bad = run("sweep --config " + ini.string());
    CHECK(bad.code == 2);
    CHECK(bad.output.find("extra") != std::string::npos);
}

TEST_CASE("z2: doubled QWZ u=1 at 64, every index is 1") {
    const auto d = scratch("z2_u1");
    const Run r = run("z2 --model doubled_qwz --u 1 --grid 64 --out " + d.string());
    CHECK(r.code == 0);
    const json z = load(d / "z2.json")["report"];
    CHECK(z["index"] == 1);
    const auto b = bits(z);
    CHECK(b.size() == 7);
    for (int x : b) CHECK(x == 1);
    CHECK(z["notes"].empty());
}

TEST_CASE("z2: doubled QWZ u=3 and trivial give 0") {
    for (const std::string model : {"doubled_qwz --u 3", "trivial --m 4"}) {
        CAPTURE(model);
        const auto d = scratch("z2_zero");
        const Run r = run("z2 --model " + model + " --grid 32 --out " + d.string());
        CHECK(r.code == 0);
        const json z = load(d / "z2.json")["report"];
        CHECK(z["index"] == 0);
        for (int x : bits(z)) CHECK(x == 0);
    }
}

TEST_CASE("z2 output is byte-identical across runs") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const std::string args = "z2 --model doubled_qwz --u -1 --grid 32 --emit-curvature --seed 7 --out ";
    REQUIRE(run(args + a.string()).code == 0);
    REQUIRE(run(args + b.string()).code == 0);
    CHECK(slurp(a / "z2.json") == slurp(b / "z2.json"));
    CHECK(slurp(a / "curvature.csv") == slurp(b / "curvature.csv"));
    CHECK(load(a / "z2.json")["seed"] == 7);
}

TEST_CASE("sweep: u in {-3,-1,1,3} gives bits 0 1 1 0") {
    const auto d = scratch("sweep");
    const Run r = run("sweep --model doubled_qwz --values \"-3 -1 1 3\" --grid 32 --workers 2 --out " + d.string());
    CHECK(r.code == 0);
    const auto rows = csv(d / "sweep.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == "u");
    const std::vector<std::string> want{"0", "1", "1", "0"};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i + 1][1] == "ok");
        CHECK(rows[i + 1][3] == want[i]);
    }
}

TEST_CASE("sweep: empty range gives a header-only CSV") {
    const auto d = scratch("sweep_empty");
    CHECK(run("sweep --model doubled_qwz --from 1 --to 0 --step 1 --out " + d.string()).code == 0);
    const auto rows = csv(d / "sweep.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].size() == 11);
}

TEST_CASE("sweep: crossing u=2 flags the closure row") {
    const auto d = scratch("sweep_closure");
    CHECK(run("sweep --model doubled_qwz --from 1.5 --to 2.5 --step 0.5 --grid 16 --out " + d.string()).code == 0);
    const auto rows = csv(d / "sweep.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[1][1] == "ok");
    CHECK(rows[2][0] == "2");
    CHECK(rows[2][1] == "gap_closed");
    CHECK(rows[2][3].empty());
    CHECK(rows[3][1] == "ok");
    CHECK(rows[1][3] == "1");
    CHECK(rows[3][3] == "0");
}

TEST_CASE("frame: QWZ u=3 with --trs is all green") {
    const auto d = scratch("frame_u3");
    const Run r = run("frame --model doubled_qwz --u 3 --grid 32 --trs --emit-frames --out " + d.string());
    CHECK(r.code == 0);
    const json j = load(d / "frame.json");
    CHECK(j["pass"].get<bool>());
    for (const char* k : {"orthonormality", "range", "periodicity", "trs"})
        CHECK(j["residuals"][k].get<double>() < 1e-6);
    const auto rows = csv(d / "frame.csv");
    CHECK(rows[0] == std::vector<std::string>{"j1", "j2", "k1", "k2", "row", "col", "re", "im"});
    CHECK(rows.size() == 1 + 33 * 33 * 4 * 2);
}

TEST_CASE("frame: QWZ u=1 with --trs exits 4 and states the index") {
    const auto d = scratch("frame_u1");
    const Run r = run("frame --model doubled_qwz --u 1 --grid 32 --trs --out " + d.string());
    CHECK(r.code == 4);
    CHECK(r.output.find("index is 1") != std::string::npos);
    const json e = load(d / "frame.json")["error"];
    CHECK(e["kind"] == "ObstructionError");
    CHECK(e["index"] == 1);
}

TEST_CASE("frame: 1-d twist") {
    const auto d = scratch("frame_twist");
    const Run r = run("frame --model twist --n-wind 1 --grid 64 --trs --out " + d.string());
    CHECK(r.code == 0);
    CHECK(load(d / "frame.json")["pass"].get<bool>());
}

TEST_CASE("wannier: trivial model is a delta at the home cell") {
    const auto d = scratch("wannier");
    const Run r = run("wannier --model trivial --m 2 --N 4 --grid 16 --radius 2 --out " + d.string());
    CHECK(r.code == 0);
    const auto rows = csv(d / "wannier.csv");
    REQUIRE(rows.size() == 1 + 25 * 2 * 4);
    double home = 0.0, away = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double mag = std::hypot(std::stod(rows[i][4]), std::stod(rows[i][5]));
        (rows[i][0] == "0" && rows[i][1] == "0" ? home : away) += mag * mag;
    }
    CHECK(home == doctest::Approx(2.0));
    CHECK(away < 1e-24);
    CHECK(load(d / "wannier.json")["window_weight"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("wannier: radius too large for the grid exits 2") {
    const auto d = scratch("wannier_alias");
    CHECK(run("wannier --model trivial --grid 16 --radius 8 --out " + d.string()).code == 2);
}

TEST_CASE("homotopy: equal indices pass, unequal indices exit 4") {
    const auto d = scratch("homotopy");
    const Run ok = run("homotopy --model doubled_qwz --u 3 --target-u 4 --grid 16 --samples 3 --out " + d.string());
    CHECK(ok.code == 0);
    const json j = load(d / "homotopy.json");
    CHECK(j["pass"].get<bool>());
    CHECK(j["endpoint_residual"].get<double>() < 1e-8);

    const auto e = scratch("homotopy_bad");
    const Run bad = run("homotopy --model doubled_qwz --u 3 --target-u 1 --grid 16 --samples 3 --out " + e.string());
    CHECK(bad.code == 4);
}
