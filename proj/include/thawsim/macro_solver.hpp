#pragma once

#include "thawsim/thermo.hpp"

#include <vector>

namespace thawsim {

struct RadialGrid {
    std::vector<double> x;

    static RadialGrid uniform(double R, int M);
    int M() const { return static_cast<int>(x.size()) - 1; }
    /// Lumped cylindrical mass, integral of phi_i * x dx.
    std::vector<double> lumped_mass() const;
    /// Index of the node nearest to radius r.
    int nearest(double r) const;
};

struct MacroState {
    std::vector<double> H1;
    std::vector<double> T1;
    std::vector<char> melted;
};

/// Per-node data from the cell problems.
struct MacroCoefficients {
    /// Pi_11 at unmelted nodes, 1 at melted nodes.
    std::vector<double> pi_factor;
    /// |Y1| at unmelted nodes, 1 at melted nodes.
    std::vector<double> capacity_factor;
    /// Uniform multiplier on D(H).
    double diffusivity_factor = 1.0;
};

/// Heat loss per unit volume at node i: sink_i = a_i + b_i * T1_i.
/// Per-node sink a + b (T - ref).
struct LinearSink {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> ref;

    double at(std::size_t i, double T) const { return a[i] + b[i] * (T - ref[i]); }

    static LinearSink zero(int n);
    static LinearSink constant(const std::vector<double>& q);
};

struct MacroStepInfo {
    int newton_iterations = 0;
    /// Heat entering through x = R_tree during the step, per radian.
    double boundary_influx = 0.0;
    /// Heat removed by the sinks during the step, per radian.
    double sink_outflow = 0.0;
};

MacroState make_macro_state(const RadialGrid& grid, const EnthalpyTemperatureMap& map, double T_init);

/// Dirichlet T_a at the outer node; the symmetry condition at x = 0 is natural.
MacroState apply_boundary_conditions(const MacroState& state, const EnthalpyTemperatureMap& map, double T_a);

/// Nodal dH1/dt of the semi-discrete system (zero at the Dirichlet node).
std::vector<double> assemble_macro_rhs(const MacroState& state, const RadialGrid& grid,
                                       const EnthalpyTemperatureMap& map,
                                       const MacroCoefficients& coeff, const LinearSink& sink);

/// One backward Euler step in H1 with Newton on omega. Throws StepRejected.
MacroState macro_step(const MacroState& state, const RadialGrid& grid,
                      const EnthalpyTemperatureMap& map, const MacroCoefficients& coeff,
                      const LinearSink& sink, double T_a, double dt, MacroStepInfo* info = nullptr);

} // namespace thawsim
