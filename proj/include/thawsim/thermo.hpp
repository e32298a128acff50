#pragma once

#include <array>

namespace thawsim {

/// Two-phase water/ice material data. Enthalpies in J/kg, absolute temperatures.
struct PhaseMaterial {
    double c_i = 2100.0;
    double c_w = 4180.0;
    double k_i = 2.22;
    double k_w = 0.556;
    double rho_i = 917.0;
    double rho_w = 1000.0;
    double H_i = 5.74e5;
    double H_w = 9.07e5;
    double T_c = 273.15;
    double c_inf = 4.18e6;
    double smoothing_width = 6660.0;

    double latent() const { return H_w - H_i; }
    double D_ice() const { return k_i / rho_i; }
    double D_water() const { return k_w / rho_w; }

    /// Throws ConfigError when any invariant fails.
    void validate() const;

    bool operator==(const PhaseMaterial&) const = default;
};

/// Regularized temperature-enthalpy map T = omega(H) and the diffusivity D(H).
///
/// Linear ice branch H/c_i, a plateau of slope 1/c_inf near T_c and the water
/// branch T_c + (H - H_w2)/c_w. Each corner is a monotone C1 quadratic spline
/// with one interior knot.
class EnthalpyTemperatureMap {
public:
    explicit EnthalpyTemperatureMap(const PhaseMaterial& material = PhaseMaterial{});

    const PhaseMaterial& material() const { return material_; }

    double omega(double H) const;
    double omega_inv(double T) const;
    double omega_prime(double H) const;
    double diffusivity(double H) const;

    /// Segment junctions H_i1, H_i2, H_w1, H_w2.
    std::array<double, 4> junctions() const;
    /// Temperature on the plateau at the midpoint (H_i + H_w)/2.
    double plateau_midpoint_temperature() const;

private:
    struct Corner {
        double a = 0, b = 0, knot = 0;
        double Ta = 0, ma = 0, mk = 0, mb = 0;
        double value(double H) const;
        double slope(double H) const;
        double inverse(double T) const;
        double T_knot() const { return Ta + 0.5 * (ma + mk) * (knot - a); }
        double Tb() const;
    };

    static Corner make_corner(double a, double b, double Ta, double Tb, double ma, double mb);

    PhaseMaterial material_;
    double Hi1_, Hi2_, Hw1_, Hw2_;
    double T_w1_;
    Corner ice_corner_;
    Corner water_corner_;
};

} // namespace thawsim
