#include "heatlab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "heatlab/errors.hpp"

namespace heatlab {

const char* boundary_name(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::neumann: return "neumann";
        case BoundaryKind::dirichlet: return "dirichlet";
        case BoundaryKind::robin: return "robin";
    }
    return "unknown";
}

Domain Domain::interval(double length, BoundaryKind bc) {
    Domain d;
    d.dim = 1;
    d.lengths = {length, 1.0};
    d.boundary = bc;
    d.validate();
    return d;
}

Domain Domain::rectangle(double lx, double ly, BoundaryKind bc) {
    Domain d;
    d.dim = 2;
    d.lengths = {lx, ly};
    d.boundary = bc;
    d.validate();
    return d;
}

Domain Domain::interval_robin(double length, double alpha, double beta) {
    Domain d;
    d.dim = 1;
    d.lengths = {length, 1.0};
    d.boundary = BoundaryKind::robin;
    d.robin_alpha = alpha;
    d.robin_beta = beta;
    d.validate();
    return d;
}

Domain Domain::rectangle_robin(double lx, double ly, double alpha, double beta) {
    Domain d;
    d.dim = 2;
    d.lengths = {lx, ly};
    d.boundary = BoundaryKind::robin;
    d.robin_alpha = alpha;
    d.robin_beta = beta;
    d.validate();
    return d;
}

double Domain::measure() const {
    return dim == 2 ? lengths[0] * lengths[1] : lengths[0];
}

void Domain::validate() const {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("domain dim must be 1 or 2, got " + std::to_string(dim));
    }
    for (int axis = 0; axis < dim; ++axis) {
        if (!(lengths[axis] > 0.0) || !std::isfinite(lengths[axis])) {
            throw std::invalid_argument("domain lengths must be positive");
        }
    }
    if (boundary == BoundaryKind::robin) {
        if (robin_alpha < 0.0 || robin_beta < 0.0 || !(robin_alpha + robin_beta > 0.0)) {
            throw std::invalid_argument(
                "robin boundary requires alpha, beta >= 0 and alpha + beta > 0");
        }
    }
}

Grid::Grid(const Domain& d, int nx_nodes) : domain(d), counts{nx_nodes, 1} {
    domain.validate();
    if (d.dim != 1) throw std::invalid_argument("1D grid constructor requires a 1D domain");
    if (nx_nodes < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
}

Grid::Grid(const Domain& d, int nx_nodes, int ny_nodes) : domain(d), counts{nx_nodes, ny_nodes} {
    domain.validate();
    if (d.dim != 2) throw std::invalid_argument("2D grid constructor requires a 2D domain");
    if (nx_nodes < 3 || ny_nodes < 3) {
        throw std::invalid_argument("grid needs at least 3 nodes per axis");
    }
}

double Grid::spacing(int axis) const {
    return domain.lengths[axis] / (counts[axis] - 1);
}

bool Grid::operator==(const Grid& other) const {
    return domain.dim == other.domain.dim && counts == other.counts &&
           domain.lengths == other.domain.lengths && domain.boundary == other.domain.boundary &&
           domain.robin_alpha == other.domain.robin_alpha &&
           domain.robin_beta == other.domain.robin_beta;
}

Field::Field(const Grid& g, double fill) : grid(g), values(g.num_nodes(), fill) {}

bool Field::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double quadrature_weight(const Grid& g, int i, int j) {
    double w = trapezoid_weight(i, g.nx()) * g.spacing(0);
    if (g.domain.dim == 2) w *= trapezoid_weight(j, g.ny()) * g.spacing(1);
    return w;
}

void require_finite(const Field& f, const char* where) {
    if (!f.all_finite()) {
        throw invalid_field_error(std::string(where) + ": field contains non-finite values");
    }
}

}  // namespace heatlab
