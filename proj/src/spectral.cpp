#include "heatlab/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "heatlab/errors.hpp"

namespace heatlab {

NeumannHeatPropagator::NeumannHeatPropagator(const Grid& g) : grid_(g) {
    const double pi = std::acos(-1.0);
    for (int axis = 0; axis < g.domain.dim; ++axis) {
        const int n = g.counts[axis];
        const int period = 2 * (n - 1);
        cos_table_[axis].resize(period);
        for (int m = 0; m < period; ++m) {
            cos_table_[axis][m] = std::cos(pi * m / (n - 1));
        }
        const double h = g.spacing(axis);
        eigenvalues_[axis].resize(n);
        for (int k = 0; k < n; ++k) {
            eigenvalues_[axis][k] = (2.0 / (h * h)) * (1.0 - cos_table_[axis][k]);
        }
    }
}

double NeumannHeatPropagator::eigenvalue(int axis, int k) const {
    return eigenvalues_[axis][k];
}

// DCT-I with trapezoid end weights. Forward maps nodal values to coefficients
// c_k with u_j = sum_k c_k cos(pi*k*j/(n-1)); the cosine modes are orthogonal
// under the trapezoid inner product, which is what makes the stencil
// self-adjoint and the transform exactly invertible.
void NeumannHeatPropagator::transform_axis(std::vector<double>& data, int axis,
                                           bool forward) const {
    const int n = grid_.counts[axis];
    const int period = 2 * (n - 1);
    const std::vector<double>& table = cos_table_[axis];

    const int lines = (axis == 0) ? grid_.ny() : grid_.nx();
    const int stride = (axis == 0) ? 1 : grid_.nx();
    const int line_stride = (axis == 0) ? grid_.nx() : 1;

    std::vector<double> in(n), out(n);
    for (int line = 0; line < lines; ++line) {
        double* base = data.data() + static_cast<std::size_t>(line) * line_stride;
        for (int k = 0; k < n; ++k) in[k] = base[static_cast<std::size_t>(k) * stride];

        for (int k = 0; k < n; ++k) {
            long double acc = 0.0L;
            int m = 0;
            if (forward) {
                for (int j = 0; j < n; ++j) {
                    const double w = trapezoid_weight(j, n);
                    acc += static_cast<long double>(w * in[j] * table[m]);
                    m += k;
                    if (m >= period) m -= period;
                }
                const double wk = trapezoid_weight(k, n);
                out[k] = static_cast<double>(acc) * (2.0 / (n - 1)) * wk;
            } else {
                for (int j = 0; j < n; ++j) {
                    acc += static_cast<long double>(in[j] * table[m]);
                    m += k;
                    if (m >= period) m -= period;
                }
                out[k] = static_cast<double>(acc);
            }
        }
        for (int k = 0; k < n; ++k) base[static_cast<std::size_t>(k) * stride] = out[k];
    }
}

Field NeumannHeatPropagator::propagate(const Field& f, double coeff, double t) const {
    if (grid_.domain.boundary != BoundaryKind::neumann) {
        throw unsupported_boundary_error("spectral propagator supports neumann boundaries only");
    }
    if (!(f.grid == grid_)) {
        throw std::invalid_argument("field grid does not match propagator grid");
    }
    if (!(coeff > 0.0)) throw std::invalid_argument("propagate requires coeff > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("propagate requires t >= 0");
    require_finite(f, "heat_propagate_spectral");

    Field result = f;
    transform_axis(result.values, 0, true);
    if (grid_.domain.dim == 2) transform_axis(result.values, 1, true);

    for (int j = 0; j < grid_.ny(); ++j) {
        const double ly = grid_.domain.dim == 2 ? eigenvalues_[1][j] : 0.0;
        for (int i = 0; i < grid_.nx(); ++i) {
            result.values[grid_.index(i, j)] *= std::exp(-coeff * (eigenvalues_[0][i] + ly) * t);
        }
    }

    transform_axis(result.values, 0, false);
    if (grid_.domain.dim == 2) transform_axis(result.values, 1, false);
    return result;
}

Field heat_propagate_spectral(const Field& f, double coeff, double t) {
    return NeumannHeatPropagator(f.grid).propagate(f, coeff, t);
}

}  // namespace heatlab
