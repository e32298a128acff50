#pragma once

#include "thawsim/radial_fe.hpp"

#include <vector>

namespace thawsim {

enum class MicroGeometry { cylindrical, planar };
enum class GradientMode { fe_flux, stencil };
enum class RemapMode { carry, interpolate };

/// Parameters of the ice-bar reference cell, physical units.
struct ReducedMicroParams {
    double T_c = 273.15;
    double c_w = 4180.0;
    double D = 5.56e-4;
    double latent = 3.33e5;
    double gamma = 0.45e-3;
    double s0 = 1e-4;
    double s_min = 1e-7;
    int M = 4;
    MicroGeometry geometry = MicroGeometry::cylindrical;
    GradientMode gradient = GradientMode::fe_flux;
    RemapMode remap = RemapMode::interpolate;

    bool planar() const { return geometry == MicroGeometry::planar; }
};

/// Ice bar of radius s inside the water annulus [s, gamma].
struct ReducedCellState {
    double s = 0.0;
    std::vector<double> theta;
    bool melted = false;
    double gamma = 0.0;
};

ReducedCellState make_reduced_cell(const ReducedMicroParams& p, double T_init);

std::vector<double> reduced_nodes(const ReducedCellState& st, const ReducedMicroParams& p);

/// Annulus problem on the frozen interval [s, gamma].
RadialProblem reduced_problem(const ReducedCellState& st, const ReducedMicroParams& p);

/// Backward Euler response of the interior nodes to the outer value T1.
AffineResponse prepare_micro_step(const ReducedCellState& st, const ReducedMicroParams& p, double dt);

/// One implicit step with Dirichlet T_c at s and T1_local at gamma; s is held fixed.
ReducedCellState micro_step(const ReducedCellState& st, const ReducedMicroParams& p,
                            double T1_local, double dt);

/// Heat flux into the ice front per radian (per unit area in planar mode).
double front_flux(const ReducedCellState& st, const ReducedMicroParams& p);

/// ds/dt from the Stefan condition, with the configured gradient mode.
double stefan_rate(const ReducedCellState& st, const ReducedMicroParams& p);

/// Cell-normalized flux 2 pi gamma_hat D dT/dy_hat at the outer radius, which
/// equals 2 pi gamma D dT/dr. Zero when melted.
double boundary_flux(const ReducedCellState& st, const ReducedMicroParams& p);

/// Advance the front with the area form s^2 <- s^2 - 2 dt F / L (planar: s <- s - dt F / L).
/// Returns the signed squared radius (planar: signed position).
double advance_front(const ReducedCellState& st, const ReducedMicroParams& p, double dt);

/// Move the grid to the new front and carry or interpolate theta.
ReducedCellState restretch(const ReducedCellState& st, const ReducedMicroParams& p, double s_new);

/// Switch to the melted state when s_new <= s_min; otherwise unchanged flag.
ReducedCellState detect_melt(const ReducedCellState& st, double s_new, const ReducedMicroParams& p);

/// Sensible heat of interior nodes plus latent heat absorbed since s0, per radian.
double reduced_cell_energy(const ReducedCellState& st, const ReducedMicroParams& p);

} // namespace thawsim
