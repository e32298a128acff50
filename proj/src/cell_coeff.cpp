#include "thawsim/cell_coeff.hpp"

#include "thawsim/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

namespace thawsim {

namespace {

constexpr double pi = std::numbers::pi;

void add_split_quad(CellMesh& mesh, std::array<int, 4> q) {
    Point2 c;
    for (int v : q) {
        c.x += 0.25 * mesh.nodes[v].x;
        c.y += 0.25 * mesh.nodes[v].y;
    }
    int ci = static_cast<int>(mesh.nodes.size());
    mesh.nodes.push_back(c);
    for (int k = 0; k < 4; ++k) {
        std::array<int, 3> t{q[k], q[(k + 1) % 4], ci};
        mesh.triangles.push_back(t);
        if (mesh.triangle_area(static_cast<int>(mesh.triangles.size()) - 1) < 0.0)
            std::swap(mesh.triangles.back()[0], mesh.triangles.back()[1]);
    }
}

CellMesh full_square(int n) {
    CellMesh mesh;
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.nodes.push_back({double(i) / n, double(j) / n});
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            add_split_quad(mesh, {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            if (i < n && j < n)
                continue;
            int mi = i == n ? 0 : i;
            int mj = j == n ? 0 : j;
            mesh.periodic_pairs.emplace_back(id(i, j), id(mi, mj));
        }
    return mesh;
}

// O-grid: each square side is joined to a quarter of the circle by a
// linear blend, with side nodes equispaced and circle nodes equiangular.
CellMesh o_grid(double gamma_hat, int n) {
    CellMesh mesh;
    int na = 4 * n;
    int nr = std::max(2, n / 2);
    auto id = [na](int a, int j) { return j * na + (a % na); };

    for (int j = 0; j <= nr; ++j) {
        double eta = double(j) / nr;
        for (int a = 0; a < na; ++a) {
            int side = a / n;
            double xi = double(a % n) / n;
            Point2 p;
            switch (side) {
            case 0: p = {xi, 0.0}; break;
            case 1: p = {1.0, xi}; break;
            case 2: p = {1.0 - xi, 1.0}; break;
            default: p = {0.0, 1.0 - xi}; break;
            }
            double theta = -0.75 * pi + a * (0.5 * pi) / n;
            Point2 c{0.5 + gamma_hat * std::cos(theta), 0.5 + gamma_hat * std::sin(theta)};
            if (j == 0)
                mesh.nodes.push_back(c);
            else if (j == nr)
                mesh.nodes.push_back(p);
            else
                mesh.nodes.push_back({(1 - eta) * c.x + eta * p.x, (1 - eta) * c.y + eta * p.y});
        }
    }
    for (int a = 0; a < na; ++a)
        mesh.circle_nodes.push_back(id(a, 0));

    for (int j = 0; j < nr; ++j)
        for (int a = 0; a < na; ++a)
            add_split_quad(mesh, {id(a, j), id(a + 1, j), id(a + 1, j + 1), id(a, j + 1)});

    // Right edge pairs with left, top with bottom, corners with (0,0).
    for (int a = 0; a < na; ++a) {
        int side = a / n;
        int q = a % n;
        int node = id(a, nr);
        if (q == 0 && side > 0) {
            mesh.periodic_pairs.emplace_back(node, id(0, nr));
        } else if (side == 1) {
            mesh.periodic_pairs.emplace_back(node, id(4 * n - q, nr));
        } else if (side == 2) {
            mesh.periodic_pairs.emplace_back(node, id(n - q, nr));
        }
    }
    return mesh;
}

struct DofMap {
    std::vector<int> dof;
    int count = 0;
};

DofMap build_dofs(const CellMesh& mesh) {
    DofMap m;
    std::vector<int> master(mesh.nodes.size());
    for (std::size_t i = 0; i < master.size(); ++i)
        master[i] = static_cast<int>(i);
    for (auto [node, partner] : mesh.periodic_pairs)
        master[node] = partner;
    m.dof.assign(mesh.nodes.size(), -1);
    for (std::size_t i = 0; i < master.size(); ++i)
        if (master[i] == static_cast<int>(i))
            m.dof[i] = m.count++;
    for (std::size_t i = 0; i < master.size(); ++i)
        if (m.dof[i] < 0)
            m.dof[i] = m.dof[master[i]];
    return m;
}

struct ElementGeometry {
    double area;
    std::array<std::array<double, 2>, 3> grad;
};

ElementGeometry element(const CellMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const Point2& p0 = mesh.nodes[tri[0]];
    const Point2& p1 = mesh.nodes[tri[1]];
    const Point2& p2 = mesh.nodes[tri[2]];
    double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    ElementGeometry g;
    g.area = 0.5 * twice;
    g.grad[0] = {(p1.y - p2.y) / twice, (p2.x - p1.x) / twice};
    g.grad[1] = {(p2.y - p0.y) / twice, (p0.x - p2.x) / twice};
    g.grad[2] = {(p0.y - p1.y) / twice, (p1.x - p0.x) / twice};
    return g;
}

} // namespace

void UnitCellGeometry::validate() const {
    if (!(gamma_hat >= 0.0 && gamma_hat < 0.5))
        throw ConfigError("cell: gamma_hat must lie in [0, 0.5)");
    if (resolution < 1)
        throw ConfigError("cell: resolution must be positive");
    if (gamma_hat > 0.0 && 4 * resolution < 16)
        throw ConfigError("cell: resolution too coarse to resolve the circle (fewer than 16 circle nodes)");
}

double CellMesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Point2& p0 = nodes[tri[0]];
    const Point2& p1 = nodes[tri[1]];
    const Point2& p2 = nodes[tri[2]];
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

double CellMesh::total_area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        a += triangle_area(static_cast<int>(t));
    return a;
}

double fluid_fraction(double gamma_hat) {
    if (!(gamma_hat >= 0.0 && gamma_hat < 0.5))
        throw ConfigError("cell: gamma_hat must lie in [0, 0.5)");
    return 1.0 - pi * gamma_hat * gamma_hat;
}

CellMesh triangulate_cell(const UnitCellGeometry& geom) {
    geom.validate();
    CellMesh mesh = geom.gamma_hat == 0.0 ? full_square(geom.resolution)
                                          : o_grid(geom.gamma_hat, geom.resolution);
    mesh.gamma_hat = geom.gamma_hat;
    return mesh;
}

std::vector<double> solve_corrector(const CellMesh& mesh, int direction, double* residual) {
    if (direction != 0 && direction != 1)
        throw ConfigError("cell: corrector direction must be 0 or 1");
    DofMap dm = build_dofs(mesh);
    int n = dm.count;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.triangles.size() * 9);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        ElementGeometry g = element(mesh, static_cast<int>(t));
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a) {
            int ra = dm.dof[tri[a]];
            b[ra] -= g.area * g.grad[a][direction];
            for (int c = 0; c < 3; ++c) {
                double k = g.area * (g.grad[a][0] * g.grad[c][0] + g.grad[a][1] * g.grad[c][1]);
                trips.emplace_back(ra, dm.dof[tri[c]], k);
            }
        }
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    double bnorm = b.norm();
    if (bnorm > 0.0) {
        // Pin dof 0; the system is compatible since b sums to zero.
        Eigen::SparseMatrix<double> Kr = K.bottomRightCorner(n - 1, n - 1);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Kr);
        if (solver.info() != Eigen::Success)
            throw SolverError("cell: corrector factorization failed");
        Eigen::VectorXd sol = solver.solve(b.tail(n - 1));
        if (solver.info() != Eigen::Success)
            throw SolverError("cell: corrector solve failed");
        mu.tail(n - 1) = sol;
    }
    if (residual)
        *residual = bnorm > 0.0 ? (K * mu - b).norm() / bnorm : 0.0;

    std::vector<double> field(mesh.nodes.size());
    for (std::size_t i = 0; i < field.size(); ++i)
        field[i] = mu[dm.dof[i]];

    double integral = 0.0, area = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        double A = mesh.triangle_area(static_cast<int>(t));
        const auto& tri = mesh.triangles[t];
        integral += A * (field[tri[0]] + field[tri[1]] + field[tri[2]]) / 3.0;
        area += A;
    }
    double mean = integral / area;
    for (double& v : field)
        v -= mean;
    return field;
}

EffectiveTensor effective_tensor(const CellMesh& mesh, const std::vector<double>& mu_1,
                                 const std::vector<double>& mu_2) {
    EffectiveTensor et;
    const std::vector<double>* mu[2] = {&mu_1, &mu_2};
    double area = 0.0;
    std::array<std::array<double, 2>, 2> corr{};
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        ElementGeometry g = element(mesh, static_cast<int>(t));
        const auto& tri = mesh.triangles[t];
        area += g.area;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double d = 0.0;
                for (int a = 0; a < 3; ++a)
                    d += (*mu[i])[tri[a]] * g.grad[a][j];
                corr[i][j] += g.area * d;
            }
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            et.pi[i][j] = (i == j ? area : 0.0) + corr[i][j];
    double off = 0.5 * (et.pi[0][1] + et.pi[1][0]);
    et.pi[0][1] = et.pi[1][0] = off;
    et.fluid_fraction = fluid_fraction(mesh.gamma_hat);
    return et;
}

EffectiveTensor compute_effective_tensor(const UnitCellGeometry& geom) {
    CellMesh mesh = triangulate_cell(geom);
    auto f1 = std::async(std::launch::async, [&] { return solve_corrector(mesh, 0); });
    std::vector<double> mu2 = solve_corrector(mesh, 1);
    std::vector<double> mu1 = f1.get();
    return effective_tensor(mesh, mu1, mu2);
}

} // namespace thawsim
