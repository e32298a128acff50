#include "thawsim/radial_fe.hpp"

#include "thawsim/errors.hpp"
#include "thawsim/tridiag.hpp"

#include <algorithm>

namespace thawsim {

std::vector<double> uniform_nodes(double a, double b, int M) {
    std::vector<double> y(M + 1);
    double h = (b - a) / M;
    for (int j = 0; j <= M; ++j)
        y[j] = a + j * h;
    y[M] = b;
    return y;
}

std::vector<double> lumped_mass(const std::vector<double>& y, bool planar) {
    std::size_t n = y.size();
    std::vector<double> m(n, 0.0);
    for (std::size_t e = 0; e + 1 < n; ++e) {
        double h = y[e + 1] - y[e];
        if (planar) {
            m[e] += 0.5 * h;
            m[e + 1] += 0.5 * h;
        } else {
            m[e] += h * (2.0 * y[e] + y[e + 1]) / 6.0;
            m[e + 1] += h * (y[e] + 2.0 * y[e + 1]) / 6.0;
        }
    }
    return m;
}

std::vector<double> conductances(const RadialProblem& p) {
    std::size_t ne = p.y.size() - 1;
    std::vector<double> k(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        double h = p.y[e + 1] - p.y[e];
        double w = p.planar ? 1.0 : 0.5 * (p.y[e] + p.y[e + 1]);
        k[e] = p.D_elem[e] * w / h;
    }
    return k;
}

AffineResponse solve_affine(const RadialProblem& p, const std::vector<double>& theta_old, double dt) {
    int M = static_cast<int>(p.y.size()) - 1;
    int j0 = p.dirichlet_inner ? 1 : 0;
    int n = M - j0;
    std::vector<double> k = conductances(p);
    std::vector<double> m = lumped_mass(p.y, p.planar);

    AffineResponse r;
    r.ref = p.dirichlet_inner ? p.T_inner : theta_old[M];
    if (n <= 0) {
        r.flux1 = k[M - 1];
        return r;
    }
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), b1(n, 0.0), b2(n, 0.0);
    for (int j = j0; j < M; ++j) {
        int row = j - j0;
        double cm = p.capacity[j] * m[j] / dt;
        double kl = j > 0 ? k[j - 1] : 0.0;
        double kr = k[j];
        di[row] = cm + kl + kr;
        b1[row] = cm * (theta_old[j] - r.ref);
        if (j > j0)
            lo[row] = -kl;
        else if (j > 0)
            b1[row] += kl * (p.T_inner - r.ref);
        if (j < M - 1)
            up[row] = -kr;
        else
            b2[row] = kr;
    }
    if (!solve_tridiagonal(lo, di, up, b1) || !solve_tridiagonal(lo, di, up, b2))
        throw StepRejected("micro: singular annulus system");
    r.base.assign(M + 1, 0.0);
    r.gain.assign(M + 1, 0.0);
    for (int j = j0; j < M; ++j) {
        r.base[j] = b1[j - j0];
        r.gain[j] = b2[j - j0];
    }
    r.gain[M] = 1.0;
    double kl = k[M - 1];
    r.flux0 = -kl * r.base[M - 1];
    r.flux1 = kl * (1.0 - r.gain[M - 1]);
    return r;
}

std::vector<double> evaluate(const RadialProblem& p, const AffineResponse& r, double T1) {
    std::size_t n = p.y.size();
    std::vector<double> theta(n);
    if (r.base.empty()) {
        theta[0] = p.T_inner;
        theta[n - 1] = T1;
        return theta;
    }
    for (std::size_t j = 0; j < n; ++j)
        theta[j] = r.ref + r.base[j] + r.gain[j] * (T1 - r.ref);
    theta[n - 1] = T1;
    return theta;
}

double interpolate_profile(const std::vector<double>& y, const std::vector<double>& theta, double x) {
    if (x <= y.front())
        return theta.front();
    if (x >= y.back())
        return theta.back();
    auto it = std::upper_bound(y.begin(), y.end(), x);
    std::size_t e = static_cast<std::size_t>(it - y.begin()) - 1;
    double t = (x - y[e]) / (y[e + 1] - y[e]);
    return (1.0 - t) * theta[e] + t * theta[e + 1];
}

} // namespace thawsim
