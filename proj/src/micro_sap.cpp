#include "thawsim/micro_sap.hpp"

#include "thawsim/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace thawsim {

namespace {

constexpr double pi = std::numbers::pi;

using Vec4 = std::array<double, 4>;

bool solve4(std::array<Vec4, 4> J, Vec4 b, Vec4& x) {
    for (int p = 0; p < 4; ++p) {
        int piv = p;
        for (int r = p + 1; r < 4; ++r)
            if (std::fabs(J[r][p]) > std::fabs(J[piv][p]))
                piv = r;
        if (J[piv][p] == 0.0)
            return false;
        std::swap(J[p], J[piv]);
        std::swap(b[p], b[piv]);
        for (int r = p + 1; r < 4; ++r) {
            double m = J[r][p] / J[p][p];
            for (int c = p; c < 4; ++c)
                J[r][c] -= m * J[p][c];
            b[r] -= m * b[p];
        }
    }
    for (int p = 3; p >= 0; --p) {
        double s = b[p];
        for (int c = p + 1; c < 4; ++c)
            s -= J[p][c] * x[c];
        x[p] = s / J[p][p];
    }
    return true;
}

} // namespace

double SapParams::initial_gas_density(double T_c) const {
    if (rho_gv0 > 0.0)
        return rho_gv0;
    return p_gv0 * M_g / (R_gas * T_c);
}

void SapParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("sap: ") + name + " must be positive");
    };
    positive(R_f, "R_f");
    positive(L_v, "L_v");
    positive(L_f, "L_f");
    positive(V_f, "V_f");
    positive(V_v, "V_v");
    positive(A, "A");
    positive(W, "W");
    positive(g, "g");
    positive(henry, "henry");
    positive(M_g, "M_g");
    positive(R_gas, "R_gas");
    positive(sigma_w, "sigma_w");
    positive(C_s, "C_s");
    positive(K, "K");
    positive(r0, "r0");
    positive(p_gf0, "p_gf0");
    positive(p_gv0, "p_gv0");
    positive(D_gas, "D_gas");
    positive(diffusivity_factor, "diffusivity_factor");
    positive(floor_radius, "floor_radius");
    if (!(N >= 1.0))
        throw ConfigError("sap: N must be at least 1");
    if (!(s_gi0 > 0.0 && s_gi0 < s_iw0 && s_iw0 <= R_f))
        throw ConfigError("sap: require 0 < s_gi0 < s_iw0 <= R_f");
    if (!(U0 >= 0.0))
        throw ConfigError("sap: U0 must be nonnegative");
    if (rho_gv0 < 0.0)
        throw ConfigError("sap: rho_gv0 must be nonnegative");
    if (!(min_width_fraction > 0.0 && min_width_fraction < 1.0))
        throw ConfigError("sap: min_width_fraction must lie in (0, 1)");
    if (!(thickness_fraction > 0.0 && thickness_fraction < 1.0))
        throw ConfigError("sap: thickness_fraction must lie in (0, 1)");
}

SapCellState make_sap_cell(const SapParams& p, const SapThermal& th, double T_init) {
    p.validate();
    if (th.M < 2)
        throw ConfigError("sap: M_micro must be at least 2");
    SapCellState st;
    st.s_iw = p.s_iw0;
    st.s_gi = p.s_gi0;
    st.r = p.r0;
    st.U = p.U0;
    st.theta.assign(th.M + 1, th.T_c);
    st.theta[th.M] = T_init;
    return st;
}

PressureClosure algebraic_closure(const SapCellState& st, const SapParams& p, double T_c, double T1_local) {
    if (!(T1_local > 0.0))
        throw DomainError("sap: temperature must be positive");
    double s_gi = std::max(st.s_gi, p.floor_radius);
    double r = std::max(st.r, p.floor_radius);
    PressureClosure c;
    c.V_g_v = pi * r * r * p.L_v;
    // Free plus dissolved vessel gas is conserved.
    double V0 = pi * p.r0 * p.r0 * p.L_v;
    double total0 = V0 + p.henry * (p.V_v - V0);
    c.rho_g_v = p.initial_gas_density(T_c) * total0 / (c.V_g_v + p.henry * (p.V_v - c.V_g_v));
    c.p_g_v = c.rho_g_v * p.R_gas * T1_local / p.M_g;
    c.p_w_v = c.p_g_v - p.sigma_w / r;
    c.p_w_f = p.p_gf0 * p.s_gi0 * p.s_gi0 / (s_gi * s_gi) - p.sigma_w / s_gi;
    return c;
}

double darcy_prefactor(const SapParams& p, double rho_w) {
    return p.K * p.A / (p.N * rho_w * p.g * p.W);
}

double darcy_rate(const PressureClosure& c, const SapParams& p, double rho_w, double T1_local) {
    return -darcy_prefactor(p, rho_w) * (c.p_w_v - c.p_w_f - p.R_gas * p.C_s * T1_local);
}

double sap_inner_radius(const SapCellState& st, const SapParams& p) {
    if (st.melted)
        return 0.0;
    return std::min(st.s_iw, p.R_f * (1.0 - p.min_width_fraction));
}

std::vector<double> sap_nodes(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    return uniform_nodes(sap_inner_radius(st, p), p.R_f, th.M);
}

RadialProblem sap_problem(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    RadialProblem rp;
    rp.y = sap_nodes(st, p, th);
    rp.planar = false;
    int M = th.M;
    if (!st.melted) {
        rp.D_elem.assign(M, th.D_w);
        rp.capacity.assign(M + 1, th.c_w);
        rp.dirichlet_inner = true;
        rp.T_inner = th.T_c;
        return rp;
    }
    // Gas core [0, s_gw] and water ring [s_gw, R_f].
    double sg = st.s_gi;
    rp.D_elem.resize(M);
    for (int e = 0; e < M; ++e) {
        double l = rp.y[e], rr = rp.y[e + 1];
        if (rr <= sg)
            rp.D_elem[e] = p.D_gas;
        else if (l >= sg)
            rp.D_elem[e] = th.D_w;
        else {
            double fg = (sg - l) / (rr - l);
            rp.D_elem[e] = 1.0 / (fg / p.D_gas + (1.0 - fg) / th.D_w);
        }
    }
    rp.capacity.resize(M + 1);
    for (int j = 0; j <= M; ++j)
        rp.capacity[j] = rp.y[j] >= sg ? th.c_w : 0.0;
    rp.dirichlet_inner = false;
    return rp;
}

double sap_front_flux(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    if (st.melted)
        return 0.0;
    std::vector<double> y = sap_nodes(st, p, th);
    double h = y[1] - y[0];
    return th.D_w * 0.5 * (y[0] + y[1]) * (st.theta[1] - st.theta[0]) / h;
}

SapRates interface_rates(const SapCellState& st, const SapParams& p, const SapThermal& th, double dU_dt) {
    SapRates r;
    double transfer = dU_dt / (pi * p.L_f);
    double s_gi = std::max(st.s_gi, p.floor_radius);
    double rr = std::max(st.r, p.floor_radius);
    if (!st.melted) {
        double F = sap_front_flux(st, p, th);
        double d_iw2 = -2.0 * F / th.latent + transfer;
        double d_gi2 = ((th.rho_i - th.rho_w) * d_iw2 + th.rho_w * transfer) / th.rho_i;
        r.ds_iw = d_iw2 / (2.0 * st.s_iw);
        r.ds_gi = d_gi2 / (2.0 * s_gi);
    } else {
        r.ds_gi = transfer / (2.0 * s_gi);
        r.ds_iw = r.ds_gi;
    }
    r.dr = -p.N * dU_dt / (2.0 * pi * rr * p.L_v);
    return r;
}

AffineResponse prepare_sap_step(const SapCellState& st, const SapParams& p, const SapThermal& th, double dt) {
    if (!(dt > 0.0))
        throw StepRejected("sap: dt must be positive");
    return solve_affine(sap_problem(st, p, th), st.theta, dt);
}

SapCellState finish_sap_step(const SapCellState& st, const SapParams& p, const SapThermal& th,
                             const AffineResponse& resp, double T1_local, double dt) {
    RadialProblem rp = sap_problem(st, p, th);
    SapCellState cur = st;
    cur.theta = evaluate(rp, resp, T1_local);
    double F = sap_front_flux(cur, p, th);

    double Rf2 = p.R_f * p.R_f;
    double water_now = st.melted ? pi * (Rf2 - st.s_gi * st.s_gi) * p.L_f
                                 : pi * (Rf2 - st.s_iw * st.s_iw) * p.L_f;
    double cap = std::max(water_now, 0.0) / dt + (st.melted ? 0.0 : 2.0 * pi * p.L_f * F / th.latent);

    // Unknowns scaled to O(1): s_iw^2/R_f^2, s_gi^2/R_f^2, r/r0, U/V_f.
    double U_scale = p.V_f;
    Vec4 x0{st.s_iw * st.s_iw / Rf2, st.s_gi * st.s_gi / Rf2, st.r / p.r0, st.U / U_scale};

    auto transfer_rate = [&](const Vec4& x) {
        SapCellState trial = cur;
        trial.s_gi = std::sqrt(std::max(x[1], 0.0) * Rf2);
        trial.r = x[2] * p.r0;
        PressureClosure c = algebraic_closure(trial, p, th.T_c, T1_local);
        return std::min(darcy_rate(c, p, th.rho_w, T1_local), cap);
    };
    auto residual = [&](const Vec4& x) {
        double dU = transfer_rate(x);
        double transfer = dU / (pi * p.L_f) / Rf2;
        Vec4 f;
        if (!st.melted) {
            double d_iw2 = -2.0 * F / th.latent / Rf2 + transfer;
            double d_gi2 = ((th.rho_i - th.rho_w) * d_iw2 + th.rho_w * transfer) / th.rho_i;
            f[0] = x[0] - x0[0] - dt * d_iw2;
            f[1] = x[1] - x0[1] - dt * d_gi2;
        } else {
            f[0] = x[0] - x[1];
            f[1] = x[1] - x0[1] - dt * transfer;
        }
        double r = std::max(x[2] * p.r0, p.floor_radius);
        f[2] = x[2] - x0[2] + dt * p.N * dU / (2.0 * pi * r * p.L_v) / p.r0;
        f[3] = x[3] - x0[3] - dt * dU / U_scale;
        return f;
    };

    Vec4 x = x0;
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        Vec4 f = residual(x);
        std::array<Vec4, 4> J{};
        for (int c = 0; c < 4; ++c) {
            Vec4 xp = x;
            double hh = 1e-7 * std::max(std::fabs(x[c]), 1e-3);
            xp[c] += hh;
            Vec4 fp = residual(xp);
            for (int r = 0; r < 4; ++r)
                J[r][c] = (fp[r] - f[r]) / hh;
        }
        Vec4 dx{};
        if (!solve4(J, Vec4{-f[0], -f[1], -f[2], -f[3]}, dx))
            throw StepRejected("sap: singular interface Jacobian");
        // Damp steps that would push the bubble or gas core through zero.
        double lam = 1.0;
        while ((x[2] + lam * dx[2] <= 0.0 || x[1] + lam * dx[1] <= 0.0) && lam > 1e-6)
            lam *= 0.5;
        double nrm = 0.0;
        for (int c = 0; c < 4; ++c) {
            x[c] += lam * dx[c];
            nrm = std::max(nrm, std::fabs(lam * dx[c]));
        }
        if (!std::isfinite(nrm))
            throw StepRejected("sap: interface Newton diverged");
        if (nrm < 1e-13) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw StepRejected("sap: interface Newton did not converge");

    SapCellState out = cur;
    out.s_iw = std::sqrt(std::max(x[0], 0.0) * Rf2);
    out.s_gi = std::sqrt(std::max(x[1], 0.0) * Rf2);
    out.r = x[2] * p.r0;
    out.U = x[3] * U_scale;
    if (out.s_iw > p.R_f)
        out.s_iw = p.R_f;
    if (st.melted)
        out.s_iw = out.s_gi;
    if (out.s_gi < p.floor_radius || out.r < p.floor_radius)
        throw StepRejected("sap: radius reached the floor");

    // Re-grid: interpolate onto the new thermal grid.
    std::vector<double> y_old = rp.y;
    std::vector<double> y_new = sap_nodes(out, p, th);
    std::vector<double> theta_new(y_new.size());
    for (std::size_t j = 0; j < y_new.size(); ++j)
        theta_new[j] = interpolate_profile(y_old, cur.theta, y_new[j]);
    if (!out.melted)
        theta_new.front() = th.T_c;
    theta_new.back() = T1_local;
    out.theta = theta_new;
    return out;
}

SapCellState sap_micro_step(const SapCellState& st, const SapParams& p, const SapThermal& th,
                            double T1_local, double dt) {
    AffineResponse resp = prepare_sap_step(st, p, th, dt);
    SapCellState out = finish_sap_step(st, p, th, resp, T1_local, dt);
    if (!out.melted && out.s_gi > out.s_iw * (1.0 + 1e-12))
        throw StepRejected("sap: gas/ice interface passed the ice/water interface");
    return out;
}

double ice_thickness(const SapCellState& st) {
    return st.melted ? 0.0 : st.s_iw - st.s_gi;
}

bool sap_melt_due(const SapCellState& st, const SapParams& p) {
    return !st.melted && ice_thickness(st) <= p.thickness_fraction * (p.s_iw0 - p.s_gi0);
}

SapCellState sap_melt_transition(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    if (st.melted)
        return st;
    SapCellState out = st;
    double s2 = st.s_iw * st.s_iw - th.rho_i / th.rho_w * (st.s_iw * st.s_iw - st.s_gi * st.s_gi);
    double s = std::sqrt(std::max(s2, p.floor_radius * p.floor_radius));
    out.s_iw = s;
    out.s_gi = s;
    out.melted = true;
    std::vector<double> y_old = sap_nodes(st, p, th);
    std::vector<double> y_new = sap_nodes(out, p, th);
    out.theta.resize(y_new.size());
    for (std::size_t j = 0; j < y_new.size(); ++j)
        out.theta[j] = interpolate_profile(y_old, st.theta, y_new[j]);
    return out;
}

double sap_boundary_flux(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    RadialProblem rp = sap_problem(st, p, th);
    std::vector<double> k = conductances(rp);
    int M = th.M;
    return 2.0 * pi * k[M - 1] * (st.theta[M] - st.theta[M - 1]);
}

double sap_cell_energy(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    RadialProblem rp = sap_problem(st, p, th);
    std::vector<double> m = lumped_mass(rp.y, false);
    double e = 0.0;
    int M = th.M;
    for (int j = 0; j < M; ++j)
        e += m[j] * rp.capacity[j] * (st.theta[j] - th.T_c);
    double ice0 = p.s_iw0 * p.s_iw0 - p.s_gi0 * p.s_gi0;
    double ice = st.melted ? 0.0 : st.s_iw * st.s_iw - st.s_gi * st.s_gi;
    return e + 0.5 * th.latent * th.rho_i / th.rho_w * (ice0 - ice);
}

SapMasses sap_masses(const SapCellState& st, const SapParams& p, const SapThermal& th) {
    SapMasses m;
    double Rf2 = p.R_f * p.R_f;
    if (st.melted) {
        m.fiber_water = th.rho_w * pi * (Rf2 - st.s_gi * st.s_gi) * p.L_f;
    } else {
        m.ice = th.rho_i * pi * (st.s_iw * st.s_iw - st.s_gi * st.s_gi) * p.L_f;
        m.fiber_water = th.rho_w * pi * (Rf2 - st.s_iw * st.s_iw) * p.L_f;
    }
    m.transferred = th.rho_w * (st.U - p.U0);
    return m;
}

} // namespace thawsim
