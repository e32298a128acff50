#pragma once

#include "thawsim/engine.hpp"

#include <string>
#include <vector>

namespace thawsim {

/// Key-value config with [section] headers, '#' or ';' comments.
///
///   [run]       scenario, T_init, T_a, t_end, workers
///   [geometry]  R_tree, delta, gamma_hat, s0_hat, M_macro, M_micro, cell_resolution
///   [material]  c_i, c_w, k_i, k_w, rho_i, rho_w, H_i, H_w, T_c, c_inf, smoothing_width
///   [sap]       fiber/vessel parameters (required block when scenario = sap)
///   [solver]    rtol, atol, dt_init, dt_max, dt_min, safety, growth_cap, shrink_cap,
///               event_tol, s_min_fraction, gradient, remap
///   [output]    snapshot_times, probe_radii (comma lists), probe_interval, directory
///
/// Omitted keys take the scenario defaults. Errors name the key and line.
SimulationConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
SimulationConfig parse_config(const std::string& path);

/// Text that parses back to an equal config.
std::string serialize_config(const SimulationConfig& config);

/// Keys accepted in the [sap] block.
std::vector<std::string> sap_keys();

std::string scenario_name(Scenario s);

} // namespace thawsim
