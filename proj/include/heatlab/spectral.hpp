#pragma once

#include <vector>

#include "heatlab/grid.hpp"

namespace heatlab {

// Exact propagator for du/dt = coeff * Lap_h u under the Neumann stencil,
// used as an oracle for the time stepper.
//
// The Neumann central-difference Laplacian has eigenvectors cos(k*pi*j/(N-1))
// with eigenvalues lambda_k = (2/h^2)(1 - cos(k*pi*h/L)) -- the discrete values,
// not (k*pi/L)^2, so the oracle shares the stepper's spatial operator and only
// temporal error remains in comparisons. 2D grids use the tensor basis.
class NeumannHeatPropagator {
public:
    explicit NeumannHeatPropagator(const Grid& g);

    // Throws unsupported_boundary_error unless the grid is Neumann; t >= 0.
    Field propagate(const Field& f, double coeff, double t) const;

    double eigenvalue(int axis, int k) const;

private:
    Grid grid_;
    // cos(pi*m/(n-1)) for m in [0, 2(n-1)), per axis; cos(pi*k*j/(n-1)) is a
    // lookup at (k*j) mod 2(n-1).
    std::array<std::vector<double>, 2> cos_table_;
    std::array<std::vector<double>, 2> eigenvalues_;

    void transform_axis(std::vector<double>& coeffs, int axis, bool forward) const;
};

// One-shot convenience wrapper.
Field heat_propagate_spectral(const Field& f, double coeff, double t);

}  // namespace heatlab
