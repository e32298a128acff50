#include "thawsim/cli.hpp"

#include "thawsim/cell_coeff.hpp"
#include "thawsim/config.hpp"
#include "thawsim/engine.hpp"
#include "thawsim/errors.hpp"
#include "thawsim/output.hpp"
#include "thawsim/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace thawsim {

namespace {

std::vector<double> parse_radii(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size())
            throw std::invalid_argument("bad radius '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw std::invalid_argument("empty radius list");
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int workers, bool serial,
            std::ostream& out) {
    SimulationConfig cfg = parse_config(config_path);
    if (workers > 0)
        cfg.workers = workers;
    if (serial)
        cfg.workers = 1;
    std::string dir = out_dir.empty() ? cfg.output.directory : out_dir;
    std::string start = utc_now();
    SimulationResult res = run(cfg);
    RunManifest m = write_outputs(res, cfg, dir, start, utc_now());
    out << "scenario " << scenario_name(cfg.scenario) << ": ";
    if (res.melt_complete_time >= 0.0)
        out << "melt complete at " << res.melt_complete_time / 3600.0 << " h";
    else
        out << "melt incomplete at t_end";
    out << " (" << res.stats.accepted_steps << " steps, " << res.stats.wall_seconds << " s)\n";
    for (const auto& f : m.files)
        out << "  " << dir << "/" << f.name << " (" << f.rows << " rows)\n";
    return 0;
}

int cmd_cell_table(const std::string& radii, const std::string& path, int resolution, std::ostream& out) {
    std::vector<double> g = parse_radii(radii);
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write '" + path + "'");
    f << "gamma_hat,pi_11,pi_12,pi_21,pi_22,fluid_fraction\n";
    char buf[256];
    for (double gh : g) {
        EffectiveTensor t = compute_effective_tensor({gh, resolution});
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", gh, t.pi[0][0], t.pi[0][1],
                      t.pi[1][0], t.pi[1][1], t.fluid_fraction);
        f << buf;
    }
    if (!f)
        throw std::runtime_error("write failed for '" + path + "'");
    out << "wrote " << g.size() << " rows to " << path << "\n";
    return 0;
}

bool report(std::ostream& out, bool ok, const std::string& what) {
    out << (ok ? "PASS " : "FAIL ") << what << "\n";
    return ok;
}

int cmd_verify(const std::string& suite, std::ostream& out, std::ostream& err) {
    bool all = suite == "all";
    bool known = false;
    bool ok = true;
    if (all || suite == "neumann") {
        known = true;
        double St = 41800.0 / 333000.0;
        double a = neumann_front(St), b = neumann_front_bisection(St);
        ok &= report(out, std::fabs(a - b) <= 1e-10, "newton and bisection agree: lambda = " + std::to_string(a));
        ok &= report(out, std::fabs(neumann_residual(a, St)) <= 1e-12, "transcendental residual");
        NeumannCheck c = neumann_micro_check(64, 1.0, 20000.0);
        ok &= report(out, c.max_rel_error <= 0.02,
                     "planar front vs similarity solution, max rel error " + std::to_string(c.max_rel_error));
    }
    if (all || suite == "cell") {
        known = true;
        EffectiveTensor t0 = compute_effective_tensor({0.0, 16});
        ok &= report(out, std::fabs(t0.pi[0][0] - 1.0) < 1e-12 && std::fabs(t0.pi[1][1] - 1.0) < 1e-12 &&
                              std::fabs(t0.pi[0][1]) < 1e-12,
                     "identity tensor without inclusion");
        EffectiveTensor t = compute_effective_tensor({0.45, 64});
        double det = t.pi[0][0] * t.pi[1][1] - t.pi[0][1] * t.pi[1][0];
        ok &= report(out, t.pi[0][0] > 0.0 && det > 0.0 && t.pi[0][1] == t.pi[1][0], "symmetric positive definite");
        ok &= report(out, t.pi[0][0] <= t.fluid_fraction, "bounded by the fluid fraction");
    }
    if (all || suite == "energy") {
        known = true;
        double r = single_phase_energy_residual(50, 60.0, 200);
        ok &= report(out, r <= 1e-8, "single-phase conservation, relative residual " + std::to_string(r));
    }
    if (!known) {
        err << "unknown verify suite '" << suite << "' (expected neumann, cell, energy or all)\n";
        return 2;
    }
    return ok ? 0 : 1;
}

} // namespace

std::string cli_synopsis() {
    return "usage:\n"
           "  thawsim run --config <file> --out <dir> [--workers N] [--seedless-deterministic]\n"
           "  thawsim cell-table --radii <list> --out <file> [--resolution N]\n"
           "  thawsim verify --suite <neumann|cell|energy|all>\n";
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiscale thaw simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;
    bool serial = false;
    auto* run_cmd = app.add_subcommand("run", "run a simulation");
    run_cmd->add_option("--config", config_path, "config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--seedless-deterministic", serial, "force the serial, bitwise reproducible mode");

    std::string radii, table_path;
    int resolution = 64;
    auto* cell_cmd = app.add_subcommand("cell-table", "tabulate the effective tensor");
    cell_cmd->add_option("--radii", radii, "comma-separated gamma_hat values")->required();
    cell_cmd->add_option("--out", table_path, "output CSV")->required();
    cell_cmd->add_option("--resolution", resolution, "cell mesh resolution");

    std::string suite;
    auto* verify_cmd = app.add_subcommand("verify", "run an oracle suite");
    verify_cmd->add_option("--suite", suite, "suite name")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << cli_synopsis();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << cli_synopsis();
        return 2;
    }

    try {
        if (*run_cmd)
            return cmd_run(config_path, out_dir, workers, serial, out);
        if (*cell_cmd)
            return cmd_cell_table(radii, table_path, resolution, out);
        if (*verify_cmd)
            return cmd_verify(suite, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << cli_synopsis();
    return 2;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

} // namespace thawsim
