#include "thawsim/cli.hpp"
#include "thawsim/config.hpp"
#include "thawsim/errors.hpp"
#include "thawsim/output.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace thawsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("thawsim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text, "test.ini");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

SimulationConfig tiny_run() {
    SimulationConfig c = default_config(Scenario::reduced);
    c.geometry.R_tree = 0.02;
    c.geometry.M_macro = 8;
    c.geometry.cell_resolution = 16;
    c.t_end = 1800.0;
    c.output.snapshot_times = {0.0, 900.0};
    c.output.probe_radii = {0.0};
    return c;
}

} // namespace

TEST_CASE("empty config gives the reduced defaults", "[io]") {
    SimulationConfig c = parse_config_text("", "empty");
    CHECK(c == default_config(Scenario::reduced));
    CHECK(c.material == PhaseMaterial{});
    CHECK(c.material.c_i == 2100.0);
    CHECK(c.material.k_w == 0.556);
    CHECK(c.material.H_w == 9.07e5);
    CHECK(c.geometry.gamma_hat == 0.45);
    CHECK(c.geometry.R_tree == 0.25);
}

TEST_CASE("config errors name the key and line", "[io]") {
    std::string e = error_of("[geometry]\ngamma_hat = 0.6\n");
    CHECK(e.find("gamma_hat") != std::string::npos);

    e = error_of("[run]\nscenario = reduced\n\n[geometry]\nbogus = 1\n");
    CHECK(e.find("bogus") != std::string::npos);
    CHECK(e.find(":5:") != std::string::npos);

    e = error_of("[geometry]\nM_macro = many\n");
    CHECK(e.find("M_macro") != std::string::npos);
    CHECK(e.find(":2:") != std::string::npos);

    e = error_of("[geometry]\nM_macro = 2.5\n");
    CHECK(e.find("integer") != std::string::npos);

    e = error_of("[run]\nscenario = sap\n");
    CHECK(e.find("[sap]") != std::string::npos);
    for (const char* key : {"R_f", "L_v", "V_f", "K", "s_iw0", "s_gi0", "r0", "p_gf0", "p_gv0"})
        CHECK(e.find(key) != std::string::npos);

    CHECK(error_of("[nowhere]\n").find("unknown section") != std::string::npos);
    CHECK(error_of("[run]\nT_a 283\n").find("key = value") != std::string::npos);
    CHECK(error_of("[run]\nT_a = 283\nT_a = 284\n").find("duplicate") != std::string::npos);
    CHECK_THROWS_AS(parse_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("config round trip", "[io]") {
    SimulationConfig c = default_config(Scenario::sap);
    c.sap.K = 2.5e-14;
    c.T_a = 280.123456789;
    c.output.probe_radii = {0.1, 0.15};
    c.solver.remap = RemapMode::carry;
    c.solver.gradient = GradientMode::stencil;
    c.workers = 3;
    std::string text = serialize_config(c);
    SimulationConfig back = parse_config_text(text, "echo");
    CHECK(back == c);
    CHECK(serialize_config(back) == text);

    SimulationConfig r = parse_config_text(serialize_config(default_config(Scenario::reduced)));
    CHECK(r == default_config(Scenario::reduced));
}

TEST_CASE("bundled configs parse", "[io]") {
    SimulationConfig r = parse_config(THAWSIM_SOURCE_DIR "/configs/reduced.ini");
    CHECK(r.scenario == Scenario::reduced);
    CHECK(r.geometry.M_macro == 200);
    SimulationConfig s = parse_config(THAWSIM_SOURCE_DIR "/configs/sap.ini");
    CHECK(s.scenario == Scenario::sap);
    CHECK(s.sap == SapParams{});
}

TEST_CASE("snapshot files", "[io]") {
    CHECK(snapshot_header(Scenario::reduced) == "t,x,H1,T1,s");
    CHECK(snapshot_header(Scenario::sap) == "t,x,H1,T1,s_iw,s_gi,r,U,p_w_f,p_w_v");

    SimulationConfig c = tiny_run();
    SimulationResult res = run(c);
    fs::path d1 = scratch_dir("out1"), d2 = scratch_dir("out2");
    RunManifest m = write_outputs(res, c, d1.string(), "start", "end");
    write_outputs(run(c), c, d2.string(), "start", "end");

    for (const auto& f : m.files) {
        REQUIRE(fs::exists(d1 / f.name));
        if (f.name.ends_with(".csv")) {
            CsvTable t = read_csv((d1 / f.name).string());
            CHECK(static_cast<long>(t.rows.size()) == f.rows);
            CHECK(slurp(d1 / f.name) == slurp(d2 / f.name));
        }
    }
    CsvTable snaps = read_csv((d1 / "snapshots.csv").string());
    CHECK(snaps.header == std::vector<std::string>{"t", "x", "H1", "T1", "s"});
    CHECK(snaps.rows.size() == 2 * 9);

    // 17 significant digits reproduce the doubles exactly.
    CHECK(snaps.rows[9][2] == res.snapshots[1].nodes[0].H1);

    std::string summary = slurp(d1 / "summary.json");
    CHECK(summary.find("melt_complete_time_s") != std::string::npos);
    CHECK(summary.find("energy_audit") != std::string::npos);
    std::string manifest = slurp(d1 / "manifest.json");
    CHECK(manifest.find("snapshots.csv") != std::string::npos);
}

TEST_CASE("strict CSV reader rejects ragged rows", "[io]") {
    fs::path d = scratch_dir("csv");
    std::ofstream(d / "bad.csv") << "a,b\n1,2\n3\n";
    CHECK_THROWS(read_csv((d / "bad.csv").string()));
    std::ofstream(d / "text.csv") << "a,b\n1,x\n";
    CHECK_THROWS(read_csv((d / "text.csv").string()));
}

TEST_CASE("cli subcommands", "[io]") {
    std::ostringstream out, err;
    CHECK(cli_main({"frobnicate"}, out, err) != 0);
    CHECK(err.str().find("usage") != std::string::npos);

    std::ostringstream out2, err2;
    CHECK(cli_main({}, out2, err2) != 0);

    fs::path d = scratch_dir("cli");
    std::ostringstream out3, err3;
    std::string table = (d / "cells.csv").string();
    REQUIRE(cli_main({"cell-table", "--radii", "0,0.25,0.45", "--out", table, "--resolution", "16"}, out3, err3) == 0);
    CsvTable t = read_csv(table);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0][1] == 1.0);
    CHECK(t.rows[1][1] < 1.0);
    CHECK(t.rows[2][1] < t.rows[1][1]);

    std::ostringstream out4, err4;
    CHECK(cli_main({"verify", "--suite", "nothing"}, out4, err4) != 0);

    std::ostringstream out5, err5;
    CHECK(cli_main({"verify", "--suite", "energy"}, out5, err5) == 0);
    CHECK(out5.str().find("PASS") != std::string::npos);

    // A config error is reported, not thrown.
    std::ofstream(d / "bad.ini") << "[geometry]\ngamma_hat = 0.6\n";
    std::ostringstream out6, err6;
    CHECK(cli_main({"run", "--config", (d / "bad.ini").string(), "--out", (d / "o").string()}, out6, err6) != 0);
    CHECK(err6.str().find("gamma_hat") != std::string::npos);
}

TEST_CASE("cli run writes a summary", "[io]") {
    fs::path d = scratch_dir("clirun");
    std::ofstream(d / "small.ini") << serialize_config(tiny_run());
    std::ostringstream out, err;
    REQUIRE(cli_main({"run", "--config", (d / "small.ini").string(), "--out", (d / "o").string(),
                      "--workers", "2", "--seedless-deterministic"},
                     out, err) == 0);
    CHECK(slurp(d / "o" / "summary.json").find("melt_complete_time_s") != std::string::npos);
    CHECK(slurp(d / "o" / "manifest.json").find("R_tree = 0.02") != std::string::npos);
}
