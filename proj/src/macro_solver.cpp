#include "thawsim/macro_solver.hpp"

#include "thawsim/errors.hpp"
#include "thawsim/tridiag.hpp"

#include <algorithm>
#include <cmath>

namespace thawsim {

namespace {

// Element conductances x_mid * Pi_e * factor * D(H_mid) / h.
std::vector<double> element_conductance(const std::vector<double>& H, const RadialGrid& grid,
                                        const EnthalpyTemperatureMap& map,
                                        const MacroCoefficients& coeff) {
    int M = grid.M();
    std::vector<double> k(M);
    for (int e = 0; e < M; ++e) {
        double h = grid.x[e + 1] - grid.x[e];
        double xm = 0.5 * (grid.x[e] + grid.x[e + 1]);
        double pe = 0.5 * (coeff.pi_factor[e] + coeff.pi_factor[e + 1]);
        double D = map.diffusivity(std::max(0.5 * (H[e] + H[e + 1]), 0.0));
        k[e] = xm * pe * coeff.diffusivity_factor * D / h;
    }
    return k;
}

} // namespace

RadialGrid RadialGrid::uniform(double R, int M) {
    if (!(R > 0.0) || M < 2)
        throw ConfigError("macro: need R > 0 and at least 2 elements");
    RadialGrid g;
    g.x.resize(M + 1);
    for (int i = 0; i <= M; ++i)
        g.x[i] = i * R / M;
    g.x[M] = R;
    return g;
}

std::vector<double> RadialGrid::lumped_mass() const {
    std::vector<double> m(x.size(), 0.0);
    for (std::size_t e = 0; e + 1 < x.size(); ++e) {
        double h = x[e + 1] - x[e];
        m[e] += h * (2.0 * x[e] + x[e + 1]) / 6.0;
        m[e + 1] += h * (x[e] + 2.0 * x[e + 1]) / 6.0;
    }
    return m;
}

int RadialGrid::nearest(double r) const {
    int best = 0;
    for (int i = 1; i <= M(); ++i)
        if (std::fabs(x[i] - r) < std::fabs(x[best] - r))
            best = i;
    return best;
}

LinearSink LinearSink::zero(int n) {
    LinearSink s;
    s.a.assign(n, 0.0);
    s.b.assign(n, 0.0);
    s.ref.assign(n, 0.0);
    return s;
}

LinearSink LinearSink::constant(const std::vector<double>& q) {
    LinearSink s;
    s.a = q;
    s.b.assign(q.size(), 0.0);
    s.ref.assign(q.size(), 0.0);
    return s;
}

MacroState make_macro_state(const RadialGrid& grid, const EnthalpyTemperatureMap& map, double T_init) {
    MacroState s;
    std::size_t n = grid.x.size();
    s.H1.assign(n, map.omega_inv(T_init));
    s.T1.assign(n, T_init);
    s.melted.assign(n, 0);
    return s;
}

MacroState apply_boundary_conditions(const MacroState& state, const EnthalpyTemperatureMap& map, double T_a) {
    MacroState s = state;
    s.H1.back() = map.omega_inv(T_a);
    s.T1.back() = T_a;
    return s;
}

std::vector<double> assemble_macro_rhs(const MacroState& state, const RadialGrid& grid,
                                       const EnthalpyTemperatureMap& map,
                                       const MacroCoefficients& coeff, const LinearSink& sink) {
    int M = grid.M();
    std::vector<double> k = element_conductance(state.H1, grid, map, coeff);
    std::vector<double> m = grid.lumped_mass();
    std::vector<double> rate(M + 1, 0.0);
    for (int i = 0; i < M; ++i) {
        double div = 0.0;
        if (i > 0)
            div += k[i - 1] * (state.T1[i - 1] - state.T1[i]);
        div += k[i] * (state.T1[i + 1] - state.T1[i]);
        double q = sink.at(i, state.T1[i]);
        rate[i] = (div - m[i] * q) / (coeff.capacity_factor[i] * m[i]);
    }
    return rate;
}

MacroState macro_step(const MacroState& state, const RadialGrid& grid,
                      const EnthalpyTemperatureMap& map, const MacroCoefficients& coeff,
                      const LinearSink& sink, double T_a, double dt, MacroStepInfo* info) {
    if (!(dt > 0.0))
        throw StepRejected("macro: dt must be positive");
    int M = grid.M();
    std::vector<double> m = grid.lumped_mass();
    MacroState s = apply_boundary_conditions(state, map, T_a);
    std::vector<double> H = s.H1;
    std::vector<double> T(M + 1);
    for (int i = 0; i <= M; ++i)
        T[i] = map.omega(std::max(H[i], 0.0));
    T[M] = T_a;

    int it = 0;
    bool converged = false;
    std::vector<double> k;
    for (; it < 40; ++it) {
        k = element_conductance(H, grid, map, coeff);
        std::vector<double> lo(M, 0.0), di(M, 0.0), up(M, 0.0), r(M, 0.0);
        for (int i = 0; i < M; ++i) {
            double cm = coeff.capacity_factor[i] * m[i] / dt;
            double wp = map.omega_prime(std::max(H[i], 0.0));
            double res = cm * (H[i] - state.H1[i]) + m[i] * sink.at(i, T[i]);
            double jd = cm + m[i] * sink.b[i] * wp;
            if (i > 0) {
                res += k[i - 1] * (T[i] - T[i - 1]);
                jd += k[i - 1] * wp;
                lo[i] = -k[i - 1] * map.omega_prime(std::max(H[i - 1], 0.0));
            }
            res += k[i] * (T[i] - T[i + 1]);
            jd += k[i] * wp;
            if (i + 1 < M)
                up[i] = -k[i] * map.omega_prime(std::max(H[i + 1], 0.0));
            di[i] = jd;
            r[i] = -res;
        }
        if (!solve_tridiagonal(lo, di, up, r))
            throw StepRejected("macro: singular Newton system");
        double dT = 0.0;
        for (int i = 0; i < M; ++i) {
            H[i] += r[i];
            if (!std::isfinite(H[i]))
                throw StepRejected("macro: Newton diverged");
            if (H[i] < 0.0)
                throw StepRejected("macro: negative enthalpy");
            double Tn = map.omega(H[i]);
            dT = std::max(dT, std::fabs(Tn - T[i]));
            T[i] = Tn;
        }
        if (dT < 1e-11) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged)
        throw StepRejected("macro: Newton did not converge");

    s.H1 = H;
    s.T1 = T;
    if (info) {
        info->newton_iterations = it;
        info->boundary_influx = dt * k[M - 1] * (T[M] - T[M - 1]);
        double out = 0.0;
        for (int i = 0; i < M; ++i)
            out += dt * m[i] * sink.at(i, T[i]);
        info->sink_outflow = out;
    }
    return s;
}

} // namespace thawsim
