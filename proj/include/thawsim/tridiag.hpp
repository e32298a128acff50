#pragma once

#include <vector>

namespace thawsim {

/// Thomas algorithm. lower[0] and upper[n-1] are ignored. Returns false on a
/// zero pivot.
inline bool solve_tridiagonal(const std::vector<double>& lower, std::vector<double> diag,
                              const std::vector<double>& upper, std::vector<double>& rhs) {
    std::size_t n = diag.size();
    if (n == 0)
        return true;
    std::vector<double> up(upper);
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0)
            return false;
        double m = lower[i] / diag[i - 1];
        diag[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0)
        return false;
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / diag[i];
    return true;
}

} // namespace thawsim
