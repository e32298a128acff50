#include "thawsim/micro_reduced.hpp"

#include "thawsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thawsim {

namespace {

/// Shift the interior values so that sum m_j theta_j matches the old grid.
/// The correction is spread over the headroom to the old extremes, so the
/// remapped profile stays inside the old range.
void conserve_heat(const std::vector<double>& m_old, const std::vector<double>& th_old,
                   const std::vector<double>& m_new, std::vector<double>& th_new) {
    std::size_t M = th_old.size() - 1;
    double lo = th_old[0], hi = th_old[0];
    for (double v : th_old) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double deficit = 0.0;
    for (std::size_t j = 1; j < M; ++j)
        deficit += m_old[j] * (th_old[j] - lo) - m_new[j] * (th_new[j] - lo);
    if (deficit == 0.0)
        return;
    double room = 0.0;
    for (std::size_t j = 1; j < M; ++j)
        room += m_new[j] * (deficit > 0.0 ? hi - th_new[j] : th_new[j] - lo);
    if (!(room > 0.0))
        return;
    double frac = std::min(std::fabs(deficit) / room, 1.0);
    for (std::size_t j = 1; j < M; ++j)
        th_new[j] += deficit > 0.0 ? frac * (hi - th_new[j]) : -frac * (th_new[j] - lo);
}

} // namespace

ReducedCellState make_reduced_cell(const ReducedMicroParams& p, double T_init) {
    if (p.M < 2)
        throw ConfigError("micro: M_micro must be at least 2");
    if (!(p.s0 > 0.0 && p.s0 < p.gamma))
        throw ConfigError("micro: initial front must lie inside (0, gamma)");
    ReducedCellState st;
    st.s = p.s0;
    st.gamma = p.gamma;
    st.theta.assign(p.M + 1, p.T_c);
    st.theta[p.M] = T_init;
    return st;
}

std::vector<double> reduced_nodes(const ReducedCellState& st, const ReducedMicroParams& p) {
    return uniform_nodes(st.s, st.gamma, p.M);
}

RadialProblem reduced_problem(const ReducedCellState& st, const ReducedMicroParams& p) {
    RadialProblem rp;
    rp.y = reduced_nodes(st, p);
    rp.D_elem.assign(p.M, p.D);
    rp.capacity.assign(p.M + 1, p.c_w);
    rp.planar = p.planar();
    rp.dirichlet_inner = true;
    rp.T_inner = p.T_c;
    return rp;
}

AffineResponse prepare_micro_step(const ReducedCellState& st, const ReducedMicroParams& p, double dt) {
    if (!(dt > 0.0))
        throw StepRejected("micro: dt must be positive");
    return solve_affine(reduced_problem(st, p), st.theta, dt);
}

ReducedCellState micro_step(const ReducedCellState& st, const ReducedMicroParams& p,
                            double T1_local, double dt) {
    ReducedCellState out = st;
    if (st.melted) {
        out.theta.assign(p.M + 1, T1_local);
        return out;
    }
    RadialProblem rp = reduced_problem(st, p);
    AffineResponse r = solve_affine(rp, st.theta, dt);
    out.theta = evaluate(rp, r, T1_local);
    return out;
}

double front_flux(const ReducedCellState& st, const ReducedMicroParams& p) {
    if (st.melted)
        return 0.0;
    std::vector<double> y = reduced_nodes(st, p);
    double h = y[1] - y[0];
    double w = p.planar() ? 1.0 : 0.5 * (y[0] + y[1]);
    return p.D * w * (st.theta[1] - st.theta[0]) / h;
}

double stefan_rate(const ReducedCellState& st, const ReducedMicroParams& p) {
    if (st.melted)
        return 0.0;
    if (p.gradient == GradientMode::stencil) {
        double h = (st.gamma - st.s) / p.M;
        double grad = (-3.0 * st.theta[0] + 4.0 * st.theta[1] - st.theta[2]) / (2.0 * h);
        return -p.D / p.latent * grad;
    }
    double F = front_flux(st, p);
    if (p.planar())
        return -F / p.latent;
    return -F / (p.latent * st.s);
}

double boundary_flux(const ReducedCellState& st, const ReducedMicroParams& p) {
    if (st.melted)
        return 0.0;
    std::vector<double> y = reduced_nodes(st, p);
    int M = p.M;
    double h = y[M] - y[M - 1];
    double w = p.planar() ? 1.0 : 0.5 * (y[M - 1] + y[M]);
    return 2.0 * std::numbers::pi * p.D * w * (st.theta[M] - st.theta[M - 1]) / h;
}

double advance_front(const ReducedCellState& st, const ReducedMicroParams& p, double dt) {
    if (p.gradient == GradientMode::stencil) {
        double s = st.s + dt * stefan_rate(st, p);
        return p.planar() ? s : (s > 0.0 ? s * s : -s * s);
    }
    double F = front_flux(st, p);
    if (p.planar())
        return st.s - dt * F / p.latent;
    return st.s * st.s - 2.0 * dt * F / p.latent;
}

ReducedCellState restretch(const ReducedCellState& st, const ReducedMicroParams& p, double s_new) {
    ReducedCellState out = st;
    out.s = s_new;
    if (p.remap == RemapMode::interpolate) {
        std::vector<double> y_old = reduced_nodes(st, p);
        std::vector<double> y_new = reduced_nodes(out, p);
        for (int j = 1; j < p.M; ++j)
            out.theta[j] = interpolate_profile(y_old, st.theta, y_new[j]);
        conserve_heat(lumped_mass(y_old, p.planar()), st.theta, lumped_mass(y_new, p.planar()), out.theta);
    }
    out.theta[0] = p.T_c;
    return out;
}

ReducedCellState detect_melt(const ReducedCellState& st, double s_new, const ReducedMicroParams& p) {
    if (st.melted || s_new > p.s_min)
        return st;
    ReducedCellState out = st;
    out.s = 0.0;
    out.melted = true;
    out.theta.assign(p.M + 1, st.theta.back());
    return out;
}

double reduced_cell_energy(const ReducedCellState& st, const ReducedMicroParams& p) {
    bool planar = p.planar();
    double latent_full = planar ? p.latent * p.s0 : 0.5 * p.latent * p.s0 * p.s0;
    if (st.melted)
        return latent_full;
    std::vector<double> m = lumped_mass(reduced_nodes(st, p), planar);
    double e = 0.0;
    for (int j = 1; j < p.M; ++j)
        e += m[j] * p.c_w * (st.theta[j] - p.T_c);
    double remaining = planar ? p.latent * st.s : 0.5 * p.latent * st.s * st.s;
    return e + latent_full - remaining;
}

} // namespace thawsim
