#pragma once

#include <vector>

namespace thawsim {

/// One-dimensional P1 heat conduction on [y_0, y_M] with lumped mass, in
/// cylindrical (weight r) or planar form. Node M carries the Dirichlet value
/// T1; node 0 is either Dirichlet or a natural boundary.
struct RadialProblem {
    std::vector<double> y;
    std::vector<double> D_elem;
    std::vector<double> capacity;
    bool planar = false;
    bool dirichlet_inner = true;
    double T_inner = 0.0;
};

/// Interior solution as an affine function of the outer value, held as
/// deviations from ref so that a uniform field is reproduced exactly:
/// theta_j = ref + base_j + gain_j * (T1 - ref), outer flux = flux0 + flux1 * (T1 - ref).
struct AffineResponse {
    double ref = 0.0;
    std::vector<double> base;
    std::vector<double> gain;
    double flux0 = 0.0;
    double flux1 = 0.0;
};

std::vector<double> uniform_nodes(double a, double b, int M);
std::vector<double> lumped_mass(const std::vector<double>& y, bool planar);
/// Element conductance D_e * w_e / h_e, with w_e the mean radius (1 if planar).
std::vector<double> conductances(const RadialProblem& p);

/// One backward Euler step from theta_old. Throws StepRejected on a zero pivot.
AffineResponse solve_affine(const RadialProblem& p, const std::vector<double>& theta_old, double dt);

/// Evaluate the response at T1, filling all M+1 nodes.
std::vector<double> evaluate(const RadialProblem& p, const AffineResponse& r, double T1);

/// Piecewise-linear interpolation of a nodal profile; values left of y_0 take
/// theta_0 and right of y_M take theta_M.
double interpolate_profile(const std::vector<double>& y, const std::vector<double>& theta, double x);

} // namespace thawsim
