#include "heatlab/laplacian.hpp"

#include <stdexcept>

#include "heatlab/errors.hpp"

namespace heatlab {
namespace detail {

bool boundary_pins_values(const Domain& d) {
    return d.boundary == BoundaryKind::dirichlet ||
           (d.boundary == BoundaryKind::robin && d.robin_alpha == 0.0);
}

void add_axis_second_difference(const Field& in, int axis, double coeff, Field& out) {
    const Grid& g = in.grid;
    const int n = g.counts[axis];
    const double h = g.spacing(axis);
    const double inv_h2 = coeff / (h * h);
    const BoundaryKind bc = g.domain.boundary;
    const bool pinned = boundary_pins_values(g.domain);

    // Robin ghost elimination at the low end with outward normal -e_axis:
    //   alpha*(u_ghost - u_1)/(2h) + beta*u_0 = 0  =>  u_ghost = u_1 - (2h*beta/alpha)*u_0,
    // giving (Lu)_0 = (2u_1 - (2 + 2h*beta/alpha)u_0)/h^2; symmetric at the high end.
    const double robin_shift = (bc == BoundaryKind::robin && g.domain.robin_alpha > 0.0)
                                   ? 2.0 * h * g.domain.robin_beta / g.domain.robin_alpha
                                   : 0.0;

    const int lines = (axis == 0) ? g.ny() : g.nx();
    for (int line = 0; line < lines; ++line) {
        auto at = [&](int k) -> double { return (axis == 0) ? in(k, line) : in(line, k); };
        auto acc = [&](int k) -> double& { return (axis == 0) ? out(k, line) : out(line, k); };
        if (!pinned) {
            const double lo = bc == BoundaryKind::neumann
                                  ? 2.0 * (at(1) - at(0))
                                  : 2.0 * at(1) - (2.0 + robin_shift) * at(0);
            const double hi = bc == BoundaryKind::neumann
                                  ? 2.0 * (at(n - 2) - at(n - 1))
                                  : 2.0 * at(n - 2) - (2.0 + robin_shift) * at(n - 1);
            acc(0) += inv_h2 * lo;
            acc(n - 1) += inv_h2 * hi;
        }
        for (int k = 1; k < n - 1; ++k) {
            acc(k) += inv_h2 * (at(k - 1) - 2.0 * at(k) + at(k + 1));
        }
    }
}

void zero_box_boundary(Field& f) {
    const Grid& g = f.grid;
    for (int j = 0; j < g.ny(); ++j) {
        f(0, j) = 0.0;
        f(g.nx() - 1, j) = 0.0;
    }
    if (g.domain.dim == 2) {
        for (int i = 0; i < g.nx(); ++i) {
            f(i, 0) = 0.0;
            f(i, g.ny() - 1) = 0.0;
        }
    }
}

}  // namespace detail

Field laplacian(const Field& f, double coeff) {
    if (!(coeff > 0.0)) {
        throw std::invalid_argument("laplacian requires coeff > 0");
    }
    require_finite(f, "laplacian");
    Field out(f.grid, 0.0);
    detail::add_axis_second_difference(f, 0, coeff, out);
    if (f.grid.domain.dim == 2) {
        detail::add_axis_second_difference(f, 1, coeff, out);
    }
    // Constrained nodes do not evolve: their rows are zero.
    if (detail::boundary_pins_values(f.grid.domain)) {
        detail::zero_box_boundary(out);
    }
    return out;
}

}  // namespace heatlab
