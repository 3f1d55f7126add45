#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace heatlab {

enum class BoundaryKind { neumann, dirichlet, robin };

const char* boundary_name(BoundaryKind kind);

// Open box (interval or rectangle) with one boundary condition on all sides.
// Robin means alpha * du/dn + beta * u = 0 with alpha, beta >= 0, alpha + beta > 0.
struct Domain {
    int dim = 1;
    std::array<double, 2> lengths{1.0, 1.0};
    BoundaryKind boundary = BoundaryKind::neumann;
    double robin_alpha = 0.0;
    double robin_beta = 0.0;

    static Domain interval(double length, BoundaryKind bc = BoundaryKind::neumann);
    static Domain rectangle(double lx, double ly, BoundaryKind bc = BoundaryKind::neumann);
    static Domain interval_robin(double length, double alpha, double beta);
    static Domain rectangle_robin(double lx, double ly, double alpha, double beta);

    double measure() const;  // |Omega|
    void validate() const;   // throws std::invalid_argument
};

// Uniform node-centered grid including both endpoints: spacing = length/(count-1).
// 2D node ordering is row-major: node (i, j) lives at values[j*nx + i].
struct Grid {
    Domain domain;
    std::array<int, 2> counts{2, 1};  // counts[1] == 1 in 1D

    Grid() = default;
    Grid(const Domain& d, int nx_nodes);
    Grid(const Domain& d, int nx_nodes, int ny_nodes);

    int nx() const { return counts[0]; }
    int ny() const { return counts[1]; }
    std::size_t num_nodes() const { return static_cast<std::size_t>(counts[0]) * counts[1]; }
    double spacing(int axis) const;
    double x(int i) const { return i * spacing(0); }
    double y(int j) const { return domain.dim == 2 ? j * spacing(1) : 0.0; }
    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(j) * counts[0] + i;
    }

    bool operator==(const Grid& other) const;
};

// Nodal values of a scalar function on a grid.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0);

    double& operator()(int i, int j = 0) { return values[grid.index(i, j)]; }
    double operator()(int i, int j = 0) const { return values[grid.index(i, j)]; }
    bool all_finite() const;
};

// Composite-trapezoid weight of node i on an axis with n nodes: 1/2 at the ends.
inline double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

// Weight of the full (tensorized) quadrature rule at a node, including spacings.
double quadrature_weight(const Grid& g, int i, int j = 0);

void require_finite(const Field& f, const char* where);

}  // namespace heatlab
