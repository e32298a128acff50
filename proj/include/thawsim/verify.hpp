#pragma once

#include "thawsim/engine.hpp"

#include <string>
#include <vector>

namespace thawsim {

/// Similarity constant of the planar one-phase Stefan problem:
/// lambda exp(lambda^2) erf(lambda) = St / sqrt(pi). Safeguarded Newton.
double neumann_front(double stefan);

/// Same root by plain bisection, for cross-checking.
double neumann_front_bisection(double stefan);

/// Residual of the transcendental equation at lambda.
double neumann_residual(double lambda, double stefan);

/// Front position 2 lambda sqrt(D t) measured from the fixed wall.
double neumann_position(double lambda, double D, double t);

/// Steady conduction in the annulus a <= r <= b with Dirichlet ends.
double steady_annulus_temperature(double r, double a, double b, double T_a, double T_b);

/// Planar ice slab melting from a wall held at T_c + dT, tracked against the
/// similarity solution shifted to the initial melt thickness.
struct NeumannCheck {
    double stefan = 0.0;
    double lambda = 0.0;
    /// Time for the similarity front to reach the initial melt thickness.
    double t_shift = 0.0;
    /// Largest relative front-distance error for t >= 10 t_shift.
    double max_rel_error = 0.0;
    int samples = 0;
};

NeumannCheck neumann_micro_check(int M, double dt, double t_end, RemapMode remap = RemapMode::interpolate);

/// Pure-water macro run (no cells): relative mismatch between the enthalpy
/// gained and the boundary influx after the given steps.
double single_phase_energy_residual(int M, double dt, int steps);

struct LedgerEntry {
    double t = 0.0;
    double macro_change = 0.0;
    double sensible_change = 0.0;
    double latent_absorbed = 0.0;
    double boundary_influx = 0.0;
    double residual = 0.0;
    /// |residual| relative to the absorbed heat (or 0 when nothing was absorbed).
    double relative = 0.0;
};

struct EnergyLedger {
    std::vector<LedgerEntry> entries;
    double max_relative = 0.0;
    double final_relative = 0.0;

    bool within(double tolerance) const { return max_relative <= tolerance; }
    /// First interval whose residual breaches the tolerance, empty if none.
    std::string breach(double tolerance) const;
};

/// Cumulative balance: boundary influx = change in macro enthalpy + micro
/// sensible heat + latent heat absorbed. Melt deposits move energy between
/// the micro and macro terms and so cancel.
EnergyLedger audit_energy(const std::vector<EnergySample>& samples);

} // namespace thawsim
