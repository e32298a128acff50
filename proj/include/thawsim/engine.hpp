#pragma once

#include "thawsim/micro_reduced.hpp"
#include "thawsim/micro_sap.hpp"
#include "thawsim/thermo.hpp"

#include <string>
#include <vector>

namespace thawsim {

enum class Scenario { reduced, sap };

struct GeometryConfig {
    double R_tree = 0.25;
    double delta = 1.0e-3;
    /// Ice-bar exclusion radius over delta (reduced scenario).
    double gamma_hat = 0.45;
    /// Initial ice-bar radius over delta (reduced scenario).
    double s0_hat = 0.1;
    int M_macro = 200;
    int M_micro = 4;
    int cell_resolution = 64;

    bool operator==(const GeometryConfig&) const = default;
};

struct SolverConfig {
    double rtol = 1e-6;
    double atol = 1e-9;
    double dt_init = 0.1;
    double dt_max = 60.0;
    double dt_min = 1e-9;
    double safety = 0.9;
    double growth_cap = 2.0;
    double shrink_cap = 0.2;
    /// Melt events land within this many seconds after the threshold crossing.
    double event_tol = 1.0;
    /// Reduced melt threshold s_min over s(0).
    double s_min_fraction = 1e-3;
    GradientMode gradient = GradientMode::fe_flux;
    RemapMode remap = RemapMode::interpolate;

    bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
    std::vector<double> snapshot_times;
    std::vector<double> probe_radii;
    double probe_interval = 60.0;
    std::string directory = "out";

    bool operator==(const OutputConfig&) const = default;
};

struct SimulationConfig {
    Scenario scenario = Scenario::reduced;
    GeometryConfig geometry;
    PhaseMaterial material;
    SapParams sap;
    double T_init = 273.15;
    double T_a = 283.15;
    double t_end = 30.0 * 3600.0;
    SolverConfig solver;
    OutputConfig output;
    int workers = 1;

    void validate() const;
    bool operator==(const SimulationConfig&) const = default;
};

/// Defaults for the two bundled scenarios.
SimulationConfig default_config(Scenario scenario);

struct NodeRecord {
    double x = 0.0;
    double H1 = 0.0;
    double T1 = 0.0;
    double s = 0.0;
    double s_iw = 0.0;
    double s_gi = 0.0;
    double r = 0.0;
    double U = 0.0;
    double p_w_f = 0.0;
    double p_w_v = 0.0;
    bool melted = false;
};

struct Snapshot {
    double t = 0.0;
    std::vector<NodeRecord> nodes;
};

struct ProbeSeries {
    double radius = 0.0;
    int node = 0;
    std::vector<double> t;
    std::vector<NodeRecord> samples;
    /// First time the gas/ice interface rose (sap), -1 if never.
    double t_gi_onset = -1.0;
    /// First time the ice/water interface fell (sap), -1 if never.
    double t_iw_onset = -1.0;
};

/// Totals used by the energy audit, per radian of the macro domain.
struct EnergySample {
    double t = 0.0;
    double macro_energy = 0.0;
    double micro_sensible = 0.0;
    double micro_latent = 0.0;
    double boundary_influx = 0.0;
};

struct RunStats {
    long accepted_steps = 0;
    long rejected_steps = 0;
    long event_retries = 0;
    double wall_seconds = 0.0;
    double min_T = 0.0;
    double max_T = 0.0;
    double min_H = 0.0;
    double dt_smallest = 0.0;
    double dt_largest = 0.0;
};

struct SimulationResult {
    Scenario scenario = Scenario::reduced;
    std::vector<double> x;
    std::vector<Snapshot> snapshots;
    std::vector<double> melt_times;
    std::vector<ProbeSeries> probes;
    std::vector<EnergySample> energy;
    Snapshot final_state;
    double melt_complete_time = -1.0;
    double pi_11 = 1.0;
    double fluid_fraction = 1.0;
    double initial_p_w_v = 0.0;
    RunStats stats;
};

/// PI step-size controller on a normalized error estimate (accept when <= 1).
struct DtController {
    double safety = 0.9;
    double growth_cap = 2.0;
    double shrink_cap = 0.2;
    double dt_min = 1e-9;
    double dt_max = 60.0;
    double err_prev = 1.0;

    double propose(double error_estimate, double dt) const;
};

/// Stateless form of the controller with the previous estimate taken as 1.
double adapt_dt(double error_estimate, double dt, const SolverConfig& solver);

SimulationResult run(const SimulationConfig& config);

/// Series of the probe whose node is nearest to radius.
const ProbeSeries& probe_series(const SimulationResult& result, double radius);

} // namespace thawsim
