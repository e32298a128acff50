#pragma once

#include "thawsim/engine.hpp"
#include "thawsim/verify.hpp"

#include <string>
#include <vector>

namespace thawsim {

struct ManifestFile {
    std::string name;
    /// Data rows, header excluded.
    long rows = 0;
};

struct RunManifest {
    std::string config_echo;
    std::string code_version;
    std::string start_time;
    std::string end_time;
    std::vector<ManifestFile> files;
};

extern const char* const code_version;

/// Column header for the scenario's snapshot CSV.
std::string snapshot_header(Scenario scenario);

/// Writes all snapshots to one CSV. Returns the number of data rows.
long write_snapshot(const SimulationResult& result, const std::string& path);
long write_probes(const SimulationResult& result, const std::string& path);
long write_melt_times(const SimulationResult& result, const std::string& path);
long write_energy(const EnergyLedger& ledger, const std::string& path);
void write_summary(const SimulationResult& result, const EnergyLedger& ledger, const std::string& path);
void write_manifest(const RunManifest& manifest, const std::string& path);

/// Writes every output file into dir and returns the manifest (also written).
RunManifest write_outputs(const SimulationResult& result, const SimulationConfig& config,
                          const std::string& dir, const std::string& start_time,
                          const std::string& end_time);

/// Strict CSV reader: every row must have the header's column count.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

/// Current UTC time, ISO 8601.
std::string utc_now();

} // namespace thawsim
