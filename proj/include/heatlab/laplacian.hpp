#pragma once

#include "heatlab/grid.hpp"

namespace heatlab {

// Second-order central-difference Laplacian scaled by coeff.
//
// Boundary closures (same kind on every side of the box):
//   neumann   - ghost-node reflection, zero normal difference
//   dirichlet - boundary nodes are constrained: output rows there are zero,
//               interior stencils read the stored boundary values
//   robin     - ghost elimination from alpha*du/dn + beta*u = 0
//               (alpha == 0 degenerates to the dirichlet treatment)
Field laplacian(const Field& f, double coeff);

namespace detail {
// Adds coeff * d2/daxis2 of `in` to `out` along one axis; shared with the stepper.
void add_axis_second_difference(const Field& in, int axis, double coeff, Field& out);
// True when the boundary condition fixes nodal values (dirichlet, or robin with alpha == 0).
bool boundary_pins_values(const Domain& d);
void zero_box_boundary(Field& f);
}  // namespace detail

}  // namespace heatlab
