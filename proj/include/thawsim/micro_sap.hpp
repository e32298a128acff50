#pragma once

#include "thawsim/radial_fe.hpp"

#include <vector>

namespace thawsim {

/// Fiber/vessel parameters for the sap exudation cell. SI units.
struct SapParams {
    double R_f = 3.5e-6;
    double L_v = 5.0e-4;
    double L_f = 1.0e-3;
    double V_f = 3.85e-14;
    double V_v = 6.10e-13;
    double A = 2.20e-8;
    double W = 3.64e-6;
    double N = 16.0;
    double g = 9.81;
    double henry = 0.0274;
    double M_g = 0.029;
    double R_gas = 8.314;
    double sigma_w = 0.076;
    double C_s = 58.4;
    double K = 1.98e-14;
    double s_iw0 = 3.5e-6;
    double s_gi0 = 2.5e-6;
    double r0 = 6.0e-6;
    double U0 = 0.0;
    double p_gf0 = 2.0e5;
    double p_gv0 = 1.0e5;
    /// Initial vessel gas density; zero means ideal gas at p_gv0 and T_c.
    double rho_gv0 = 0.0;
    /// Gas-phase diffusivity in the post-melt fiber core (k/rho units).
    double D_gas = 2.0e-5;
    /// Multiplier on the macroscale diffusivity.
    double diffusivity_factor = 10.0;
    /// Thermal annulus keeps at least this fraction of R_f of water width.
    double min_width_fraction = 1e-3;
    /// Melt transition when ice thickness drops below this fraction of the initial thickness.
    double thickness_fraction = 1e-6;
    double floor_radius = 1e-9;

    double initial_gas_density(double T_c) const;
    void validate() const;

    bool operator==(const SapParams&) const = default;
};

/// Thermal constants shared with the reduced model.
struct SapThermal {
    double T_c = 273.15;
    double c_w = 4180.0;
    double D_w = 5.56e-4;
    double latent = 3.33e5;
    double rho_i = 917.0;
    double rho_w = 1000.0;
    int M = 4;
};

struct SapCellState {
    double s_iw = 0.0;
    double s_gi = 0.0;
    double r = 0.0;
    double U = 0.0;
    /// Nodal temperatures on the thermal grid ([a, R_f] pre-melt, [0, R_f] post-melt).
    std::vector<double> theta;
    bool melted = false;

    double s_gw() const { return s_gi; }
};

struct PressureClosure {
    double p_w_f = 0.0;
    double p_w_v = 0.0;
    double p_g_v = 0.0;
    double rho_g_v = 0.0;
    double V_g_v = 0.0;
};

struct SapRates {
    double ds_iw = 0.0;
    double ds_gi = 0.0;
    double dr = 0.0;
};

SapCellState make_sap_cell(const SapParams& p, const SapThermal& th, double T_init);

/// Closure chain: V_g^v, rho_g^v, p_g^v, p_w^v, p_w^f.
PressureClosure algebraic_closure(const SapCellState& st, const SapParams& p, double T_c, double T1_local);

double darcy_prefactor(const SapParams& p, double rho_w);
double darcy_rate(const PressureClosure& c, const SapParams& p, double rho_w, double T1_local);

/// Heat flux into the ice/water interface per radian (zero post-melt).
double sap_front_flux(const SapCellState& st, const SapParams& p, const SapThermal& th);

/// Interface velocities for a given transfer rate, using the current front flux.
SapRates interface_rates(const SapCellState& st, const SapParams& p, const SapThermal& th, double dU_dt);

/// Inner radius of the thermal grid.
double sap_inner_radius(const SapCellState& st, const SapParams& p);
std::vector<double> sap_nodes(const SapCellState& st, const SapParams& p, const SapThermal& th);
RadialProblem sap_problem(const SapCellState& st, const SapParams& p, const SapThermal& th);

AffineResponse prepare_sap_step(const SapCellState& st, const SapParams& p, const SapThermal& th, double dt);

/// Given the solved thermal response and the new T1, advance the interfaces,
/// bubble and transfer volume by backward Euler, and re-grid. Throws
/// StepRejected on Newton failure. A negative ice thickness in the result means
/// the melt event lies inside the step; the caller shortens the step.
SapCellState finish_sap_step(const SapCellState& st, const SapParams& p, const SapThermal& th,
                             const AffineResponse& resp, double T1_local, double dt);

/// Thermal step with T1_local held fixed, then the interface substep. Throws
/// StepRejected when the gas/ice interface passes the ice/water interface.
SapCellState sap_micro_step(const SapCellState& st, const SapParams& p, const SapThermal& th,
                            double T1_local, double dt);

double ice_thickness(const SapCellState& st);
bool sap_melt_due(const SapCellState& st, const SapParams& p);

/// Merge the interfaces (water mass conserving), move the thermal grid to [0, R_f].
SapCellState sap_melt_transition(const SapCellState& st, const SapParams& p, const SapThermal& th);

/// Cell-normalized flux 2 pi R_f_hat D dT/dr_hat at the fiber wall.
double sap_boundary_flux(const SapCellState& st, const SapParams& p, const SapThermal& th);

/// Sensible plus latent heat per radian, relative to the frozen initial state.
double sap_cell_energy(const SapCellState& st, const SapParams& p, const SapThermal& th);

/// Ice, fiber water and transferred water masses, kg.
struct SapMasses {
    double ice = 0.0;
    double fiber_water = 0.0;
    double transferred = 0.0;
    double total() const { return ice + fiber_water + transferred; }
};
SapMasses sap_masses(const SapCellState& st, const SapParams& p, const SapThermal& th);

} // namespace thawsim
