#include "thawsim/verify.hpp"

#include "thawsim/errors.hpp"
#include "thawsim/macro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thawsim {

namespace {

double lhs(double l) { return l * std::exp(l * l) * std::erf(l); }

double bracket_hi(double rhs) {
    double hi = 1.0;
    while (lhs(hi) < rhs)
        hi *= 2.0;
    return hi;
}

} // namespace

double neumann_residual(double lambda, double stefan) {
    return lhs(lambda) - stefan / std::sqrt(std::numbers::pi);
}

double neumann_front(double stefan) {
    if (!(stefan > 0.0))
        throw DomainError("neumann_front: Stefan number must be positive");
    const double rhs = stefan / std::sqrt(std::numbers::pi);
    double lo = 0.0, hi = bracket_hi(rhs);
    double l = std::min(std::sqrt(stefan / 2.0), 0.5 * (lo + hi));
    for (int it = 0; it < 200; ++it) {
        double f = lhs(l) - rhs;
        if (std::fabs(f) <= 1e-15 * std::max(1.0, rhs))
            break;
        if (f > 0.0)
            hi = l;
        else
            lo = l;
        double e = std::exp(l * l);
        double df = e * std::erf(l) * (1.0 + 2.0 * l * l) + 2.0 * l / std::sqrt(std::numbers::pi);
        double next = l - f / df;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::fabs(next - l) <= 1e-16 * std::max(1.0, l)) {
            l = next;
            break;
        }
        l = next;
    }
    return l;
}

double neumann_front_bisection(double stefan) {
    if (!(stefan > 0.0))
        throw DomainError("neumann_front_bisection: Stefan number must be positive");
    const double rhs = stefan / std::sqrt(std::numbers::pi);
    double lo = 0.0, hi = bracket_hi(rhs);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (lhs(mid) < rhs)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double neumann_position(double lambda, double D, double t) {
    return 2.0 * lambda * std::sqrt(D * t);
}

double steady_annulus_temperature(double r, double a, double b, double T_a, double T_b) {
    if (!(a > 0.0 && b > a))
        throw DomainError("steady_annulus_temperature: need 0 < a < b");
    return T_a + (T_b - T_a) * std::log(r / a) / std::log(b / a);
}

NeumannCheck neumann_micro_check(int M, double dt, double t_end, RemapMode remap) {
    ReducedMicroParams p;
    p.geometry = MicroGeometry::planar;
    p.M = M;
    p.gamma = 0.1;
    p.s0 = 0.099;
    p.s_min = 1e-6;
    p.remap = remap;
    const double dT = 10.0;

    NeumannCheck out;
    out.stefan = p.c_w * dT / p.latent;
    out.lambda = neumann_front(out.stefan);
    double a = p.D / p.c_w;
    double d0 = p.gamma - p.s0;
    out.t_shift = d0 * d0 / (4.0 * out.lambda * out.lambda * a);

    // Linear start profile, close to the similarity profile for a thin melt layer.
    ReducedCellState st = make_reduced_cell(p, p.T_c + dT);
    std::vector<double> y = reduced_nodes(st, p);
    for (int j = 0; j <= M; ++j)
        st.theta[j] = p.T_c + dT * (y[j] - y[0]) / (y[M] - y[0]);

    double t = 0.0;
    while (t < t_end - 1e-9) {
        double h = std::min(dt, t_end - t);
        st = micro_step(st, p, p.T_c + dT, h);
        double s = advance_front(st, p, h);
        if (s <= p.s_min)
            break;
        st = restretch(st, p, s);
        t += h;
        if (t >= 10.0 * out.t_shift) {
            double X = p.gamma - st.s;
            double Xe = neumann_position(out.lambda, a, t + out.t_shift);
            out.max_rel_error = std::max(out.max_rel_error, std::fabs(X / Xe - 1.0));
            ++out.samples;
        }
    }
    return out;
}

double single_phase_energy_residual(int M, double dt, int steps) {
    PhaseMaterial mat;
    EnthalpyTemperatureMap map(mat);
    RadialGrid grid = RadialGrid::uniform(0.25, M);
    MacroCoefficients coeff;
    coeff.pi_factor.assign(M + 1, 1.0);
    coeff.capacity_factor.assign(M + 1, 1.0);
    double T_a = mat.T_c + 10.0;
    MacroState st = apply_boundary_conditions(make_macro_state(grid, map, mat.T_c + 1.0), map, T_a);
    std::vector<double> m = grid.lumped_mass();
    auto energy = [&](const MacroState& s) {
        double e = 0.0;
        for (int i = 0; i < M; ++i)
            e += m[i] * s.H1[i];
        return e;
    };
    double e0 = energy(st);
    double influx = 0.0;
    LinearSink none = LinearSink::zero(M + 1);
    for (int k = 0; k < steps; ++k) {
        MacroStepInfo info;
        st = macro_step(st, grid, map, coeff, none, T_a, dt, &info);
        influx += info.boundary_influx;
    }
    return std::fabs(energy(st) - e0 - influx) / std::fabs(influx);
}

std::string EnergyLedger::breach(double tolerance) const {
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].relative > tolerance) {
            std::ostringstream os;
            double t0 = k > 0 ? entries[k - 1].t : 0.0;
            os << "energy residual " << entries[k].relative << " exceeds " << tolerance
               << " in interval [" << t0 << ", " << entries[k].t << "] s";
            return os.str();
        }
    }
    return {};
}

EnergyLedger audit_energy(const std::vector<EnergySample>& samples) {
    EnergyLedger ledger;
    if (samples.empty())
        return ledger;
    const EnergySample& s0 = samples.front();
    double scale = 0.0;
    for (const auto& s : samples) {
        LedgerEntry e;
        e.t = s.t;
        e.macro_change = s.macro_energy - s0.macro_energy;
        e.sensible_change = s.micro_sensible - s0.micro_sensible;
        e.latent_absorbed = s.micro_latent - s0.micro_latent;
        e.boundary_influx = s.boundary_influx - s0.boundary_influx;
        e.residual = e.boundary_influx - (e.macro_change + e.sensible_change + e.latent_absorbed);
        scale = std::max(scale, std::fabs(e.boundary_influx));
        double denom = std::fabs(e.boundary_influx);
        e.relative = denom > 0.0 ? std::fabs(e.residual) / denom : (e.residual == 0.0 ? 0.0 : INFINITY);
        ledger.entries.push_back(e);
    }
    for (const auto& e : ledger.entries)
        ledger.max_relative = std::max(ledger.max_relative, e.relative);
    ledger.final_relative = ledger.entries.back().relative;
    return ledger;
}

} // namespace thawsim
