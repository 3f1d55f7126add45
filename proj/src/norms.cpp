#include "heatlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

// Trapezoid sum of g(u_ij) over all nodes, accumulated in extended precision.
template <typename NodeFn>
double weighted_sum(const Field& f, NodeFn&& g) {
    const Grid& grid = f.grid;
    long double acc = 0.0L;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            acc += static_cast<long double>(quadrature_weight(grid, i, j)) *
                   static_cast<long double>(g(f.values[grid.index(i, j)]));
        }
    }
    return static_cast<double>(acc);
}

}  // namespace

double norm_p(const Field& f, double p) {
    if (!(p >= 1.0)) {
        throw std::invalid_argument("norm_p requires p >= 1");
    }
    require_finite(f, "norm_p");
    if (std::isinf(p)) return norm_inf(f);
    if (p == 1.0) {
        return weighted_sum(f, [](double v) { return std::abs(v); });
    }
    if (p == 2.0) {
        return std::sqrt(weighted_sum(f, [](double v) { return v * v; }));
    }
    return std::pow(weighted_sum(f, [p](double v) { return std::pow(std::abs(v), p); }), 1.0 / p);
}

double norm_inf(const Field& f) {
    require_finite(f, "norm_inf");
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double integrate(const Field& f) {
    require_finite(f, "integrate");
    return weighted_sum(f, [](double v) { return v; });
}

double min_value(const Field& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::min(m, v);
    return m;
}

double max_value(const Field& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::max(m, v);
    return m;
}

double norm_inf_diff(const Field& a, const Field& b) {
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("norm_inf_diff: size mismatch");
    }
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        m = std::max(m, std::abs(a.values[k] - b.values[k]));
    }
    return m;
}

}  // namespace heatlab
