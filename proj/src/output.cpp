#include "thawsim/output.hpp"

#include "thawsim/config.hpp"
#include "thawsim/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace thawsim {

const char* const code_version = "thawsim 1.0.0";

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path + "'");
    return f;
}

void finish(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f)
        throw std::runtime_error("write failed for '" + path + "'");
}

void write_row(std::ostream& os, Scenario sc, double t, const NodeRecord& r) {
    os << num(t) << ',' << num(r.x) << ',' << num(r.H1) << ',' << num(r.T1);
    if (sc == Scenario::reduced)
        os << ',' << num(r.s);
    else
        os << ',' << num(r.s_iw) << ',' << num(r.s_gi) << ',' << num(r.r) << ',' << num(r.U) << ','
           << num(r.p_w_f) << ',' << num(r.p_w_v);
    os << '\n';
}

} // namespace

std::string snapshot_header(Scenario scenario) {
    return scenario == Scenario::reduced ? "t,x,H1,T1,s" : "t,x,H1,T1,s_iw,s_gi,r,U,p_w_f,p_w_v";
}

long write_snapshot(const SimulationResult& result, const std::string& path) {
    auto f = open_out(path);
    f << snapshot_header(result.scenario) << '\n';
    long rows = 0;
    for (const auto& snap : result.snapshots)
        for (const auto& r : snap.nodes) {
            write_row(f, result.scenario, snap.t, r);
            ++rows;
        }
    finish(f, path);
    return rows;
}

long write_probes(const SimulationResult& result, const std::string& path) {
    auto f = open_out(path);
    f << snapshot_header(result.scenario) << '\n';
    long rows = 0;
    for (const auto& p : result.probes)
        for (std::size_t k = 0; k < p.t.size(); ++k) {
            write_row(f, result.scenario, p.t[k], p.samples[k]);
            ++rows;
        }
    finish(f, path);
    return rows;
}

long write_melt_times(const SimulationResult& result, const std::string& path) {
    auto f = open_out(path);
    f << "x,melt_time\n";
    for (std::size_t i = 0; i < result.x.size(); ++i)
        f << num(result.x[i]) << ',' << num(result.melt_times[i]) << '\n';
    finish(f, path);
    return static_cast<long>(result.x.size());
}

long write_energy(const EnergyLedger& ledger, const std::string& path) {
    auto f = open_out(path);
    f << "t,macro_change,sensible_change,latent_absorbed,boundary_influx,residual,relative\n";
    for (const auto& e : ledger.entries)
        f << num(e.t) << ',' << num(e.macro_change) << ',' << num(e.sensible_change) << ','
          << num(e.latent_absorbed) << ',' << num(e.boundary_influx) << ',' << num(e.residual) << ','
          << num(e.relative) << '\n';
    finish(f, path);
    return static_cast<long>(ledger.entries.size());
}

void write_summary(const SimulationResult& result, const EnergyLedger& ledger, const std::string& path) {
    nlohmann::json j;
    j["scenario"] = scenario_name(result.scenario);
    j["melt_complete_time_s"] = result.melt_complete_time >= 0.0 ? nlohmann::json(result.melt_complete_time)
                                                                  : nlohmann::json(nullptr);
    if (result.melt_complete_time >= 0.0)
        j["melt_complete_time_h"] = result.melt_complete_time / 3600.0;
    j["pi_11"] = result.pi_11;
    j["fluid_fraction"] = result.fluid_fraction;
    j["nodes_melted"] = std::count_if(result.melt_times.begin(), result.melt_times.end(),
                                      [](double t) { return t >= 0.0; });
    auto probes = nlohmann::json::array();
    for (const auto& p : result.probes) {
        nlohmann::json q;
        q["radius"] = p.radius;
        q["x"] = result.x[p.node];
        if (!p.samples.empty()) {
            q["final_T1"] = p.samples.back().T1;
            if (result.scenario == Scenario::sap) {
                q["final_p_w_v"] = p.samples.back().p_w_v;
                q["t_gi_onset"] = p.t_gi_onset;
                q["t_iw_onset"] = p.t_iw_onset;
            }
        }
        probes.push_back(q);
    }
    j["probes"] = probes;
    if (result.scenario == Scenario::sap)
        j["initial_p_w_v"] = result.initial_p_w_v;
    const auto& s = result.stats;
    j["stats"] = {{"accepted_steps", s.accepted_steps}, {"rejected_steps", s.rejected_steps},
                  {"event_retries", s.event_retries},   {"wall_seconds", s.wall_seconds},
                  {"min_T", s.min_T},                   {"max_T", s.max_T},
                  {"min_H", s.min_H},                   {"dt_smallest", s.dt_smallest},
                  {"dt_largest", s.dt_largest}};
    auto entries = nlohmann::json::array();
    for (const auto& e : ledger.entries)
        entries.push_back({{"t", e.t}, {"residual", e.residual}, {"relative", e.relative}});
    j["energy_audit"] = {{"max_relative", ledger.max_relative},
                         {"final_relative", ledger.final_relative},
                         {"entries", entries}};
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish(f, path);
}

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json j;
    j["code_version"] = m.code_version;
    j["start_time"] = m.start_time;
    j["end_time"] = m.end_time;
    j["config"] = m.config_echo;
    auto files = nlohmann::json::array();
    for (const auto& f : m.files)
        files.push_back({{"name", f.name}, {"rows", f.rows}});
    j["files"] = files;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish(f, path);
}

RunManifest write_outputs(const SimulationResult& result, const SimulationConfig& config,
                          const std::string& dir, const std::string& start_time,
                          const std::string& end_time) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    auto at = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

    EnergyLedger ledger = audit_energy(result.energy);
    RunManifest m;
    m.config_echo = serialize_config(config);
    m.code_version = code_version;
    m.start_time = start_time;
    m.end_time = end_time;
    m.files.push_back({"snapshots.csv", write_snapshot(result, at("snapshots.csv"))});
    m.files.push_back({"probes.csv", write_probes(result, at("probes.csv"))});
    m.files.push_back({"melt_times.csv", write_melt_times(result, at("melt_times.csv"))});
    m.files.push_back({"energy.csv", write_energy(ledger, at("energy.csv"))});
    write_summary(result, ledger, at("summary.json"));
    m.files.push_back({"summary.json", 1});
    write_manifest(m, at("manifest.json"));
    return m;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error(path + ": missing header");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ','))
        t.header.push_back(cell);
    long lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        std::vector<double> row;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size() || cell.empty())
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != t.header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string utc_now() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace thawsim
