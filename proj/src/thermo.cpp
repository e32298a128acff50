#include "thawsim/thermo.hpp"

#include "thawsim/errors.hpp"

#include <cmath>
#include <string>

namespace thawsim {

void PhaseMaterial::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("material: ") + name + " must be positive");
    };
    positive(c_i, "c_i");
    positive(c_w, "c_w");
    positive(k_i, "k_i");
    positive(k_w, "k_w");
    positive(rho_i, "rho_i");
    positive(rho_w, "rho_w");
    positive(H_i, "H_i");
    positive(H_w, "H_w");
    positive(T_c, "T_c");
    positive(c_inf, "c_inf");
    positive(smoothing_width, "smoothing_width");
    if (!(H_i < H_w))
        throw ConfigError("material: H_i must be below H_w");
    if (!(H_i + smoothing_width < H_w - smoothing_width))
        throw ConfigError("material: smoothing intervals overlap");
    if (!(c_inf > 10.0 * c_w))
        throw ConfigError("material: c_inf must be much larger than c_w");
}

double EnthalpyTemperatureMap::Corner::value(double H) const {
    if (H <= knot) {
        double u = H - a;
        return Ta + ma * u + 0.5 * (mk - ma) / (knot - a) * u * u;
    }
    double u = H - knot;
    return T_knot() + mk * u + 0.5 * (mb - mk) / (b - knot) * u * u;
}

double EnthalpyTemperatureMap::Corner::slope(double H) const {
    if (H <= knot)
        return ma + (mk - ma) * (H - a) / (knot - a);
    return mk + (mb - mk) * (H - knot) / (b - knot);
}

double EnthalpyTemperatureMap::Corner::Tb() const {
    return T_knot() + 0.5 * (mk + mb) * (b - knot);
}

double EnthalpyTemperatureMap::Corner::inverse(double T) const {
    // Stable root of T0 + m u + c u^2 = T on the monotone piece.
    auto solve = [](double T0, double m, double c, double T) {
        double r = T - T0;
        double disc = m * m + 4.0 * c * r;
        if (disc < 0.0)
            disc = 0.0;
        return 2.0 * r / (m + std::sqrt(disc));
    };
    double Tk = T_knot();
    double H;
    if (T <= Tk)
        H = a + solve(Ta, ma, 0.5 * (mk - ma) / (knot - a), T);
    else
        H = knot + solve(Tk, mk, 0.5 * (mb - mk) / (b - knot), T);
    // One Newton polish.
    H -= (value(H) - T) / slope(H);
    return H;
}

EnthalpyTemperatureMap::Corner EnthalpyTemperatureMap::make_corner(
    double a, double b, double Ta, double Tb, double ma, double mb) {
    double chord = (Tb - Ta) / (b - a);
    bool between = (chord - ma) * (chord - mb) < 0.0;
    if (!between)
        throw ConfigError("material: corner smoothing cannot be made monotone");
    Corner c;
    c.a = a;
    c.b = b;
    c.Ta = Ta;
    c.ma = ma;
    c.mb = mb;
    c.mk = chord;
    c.knot = a + (mb - chord) * (b - a) / (mb - ma);
    return c;
}

EnthalpyTemperatureMap::EnthalpyTemperatureMap(const PhaseMaterial& material)
    : material_(material) {
    material_.validate();
    const auto& m = material_;
    double w = m.smoothing_width;
    Hi1_ = m.H_i - w;
    Hi2_ = m.H_i + w;
    Hw1_ = m.H_w - w;
    Hw2_ = m.H_w + w;

    double s_inf = 1.0 / m.c_inf;
    double s_w = 1.0 / m.c_w;
    double s_i = 1.0 / m.c_i;

    // Water-side chord is the geometric mean of the two adjoining slopes.
    T_w1_ = m.T_c - 2.0 * w * std::sqrt(s_inf * s_w);
    double T_i2 = T_w1_ - (Hw1_ - Hi2_) * s_inf;

    water_corner_ = make_corner(Hw1_, Hw2_, T_w1_, m.T_c, s_inf, s_w);
    ice_corner_ = make_corner(Hi1_, Hi2_, Hi1_ * s_i, T_i2, s_i, s_inf);
}

std::array<double, 4> EnthalpyTemperatureMap::junctions() const {
    return {Hi1_, Hi2_, Hw1_, Hw2_};
}

double EnthalpyTemperatureMap::plateau_midpoint_temperature() const {
    return omega(0.5 * (material_.H_i + material_.H_w));
}

double EnthalpyTemperatureMap::omega(double H) const {
    if (!(H >= 0.0))
        throw DomainError("omega: enthalpy must be nonnegative");
    if (H < Hi1_)
        return H / material_.c_i;
    if (H < Hi2_)
        return ice_corner_.value(H);
    if (H < Hw1_)
        return T_w1_ - (Hw1_ - H) / material_.c_inf;
    if (H < Hw2_)
        return water_corner_.value(H);
    return material_.T_c + (H - Hw2_) / material_.c_w;
}

double EnthalpyTemperatureMap::omega_prime(double H) const {
    if (!(H >= 0.0))
        throw DomainError("omega_prime: enthalpy must be nonnegative");
    if (H < Hi1_)
        return 1.0 / material_.c_i;
    if (H < Hi2_)
        return ice_corner_.slope(H);
    if (H < Hw1_)
        return 1.0 / material_.c_inf;
    if (H < Hw2_)
        return water_corner_.slope(H);
    return 1.0 / material_.c_w;
}

double EnthalpyTemperatureMap::omega_inv(double T) const {
    if (!(T >= 0.0) || !std::isfinite(T))
        throw DomainError("omega_inv: temperature outside the range of omega");
    double T_i1 = Hi1_ / material_.c_i;
    double T_i2 = ice_corner_.Tb();
    if (T < T_i1)
        return T * material_.c_i;
    if (T < T_i2)
        return ice_corner_.inverse(T);
    if (T < T_w1_)
        return Hw1_ - (T_w1_ - T) * material_.c_inf;
    if (T < material_.T_c)
        return water_corner_.inverse(T);
    return Hw2_ + (T - material_.T_c) * material_.c_w;
}

double EnthalpyTemperatureMap::diffusivity(double H) const {
    if (!(H >= 0.0))
        throw DomainError("diffusivity: enthalpy must be nonnegative");
    const auto& m = material_;
    if (H < m.H_i)
        return m.D_ice();
    if (H < m.H_w)
        return m.D_ice() + (m.D_water() - m.D_ice()) * (H - m.H_i) / (m.H_w - m.H_i);
    return m.D_water();
}

} // namespace thawsim
