#pragma once

#include <array>
#include <utility>
#include <vector>

namespace thawsim {

struct UnitCellGeometry {
    double gamma_hat = 0.45;
    int resolution = 32;

    void validate() const;
};

struct Point2 {
    double x = 0;
    double y = 0;
};

/// Conforming triangulation of the unit square minus a centered disk.
struct CellMesh {
    std::vector<Point2> nodes;
    std::vector<std::array<int, 3>> triangles;
    /// (node, partner) for every node on the top or right edge; partner lies on
    /// the opposite edge. All four corners map to the (0,0) corner.
    std::vector<std::pair<int, int>> periodic_pairs;
    std::vector<int> circle_nodes;
    double gamma_hat = 0;

    double triangle_area(int t) const;
    double total_area() const;
};

struct EffectiveTensor {
    std::array<std::array<double, 2>, 2> pi{};
    double fluid_fraction = 1.0;
};

double fluid_fraction(double gamma_hat);

CellMesh triangulate_cell(const UnitCellGeometry& geom);

/// Periodic P1 corrector for direction e_i (i = 0 or 1), zero mean over the cell.
/// When residual is given it receives the relative residual of the linear system.
std::vector<double> solve_corrector(const CellMesh& mesh, int direction,
                                    double* residual = nullptr);

EffectiveTensor effective_tensor(const CellMesh& mesh, const std::vector<double>& mu_1,
                                 const std::vector<double>& mu_2);

/// Mesh, both corrector solves and the tensor in one call.
EffectiveTensor compute_effective_tensor(const UnitCellGeometry& geom);

} // namespace thawsim
