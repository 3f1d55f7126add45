#pragma once

#include "heatlab/grid.hpp"

namespace heatlab {

// L^p norm by composite trapezoid quadrature of |u|^p; p == inf gives max |u|.
// Throws std::invalid_argument for p < 1 and invalid_field_error on NaN/inf input.
double norm_p(const Field& f, double p);

double norm_inf(const Field& f);

// Signed trapezoid integral (no absolute value).
double integrate(const Field& f);

double min_value(const Field& f);
double max_value(const Field& f);

// max_i |a_i - b_i| without forming the difference field.
double norm_inf_diff(const Field& a, const Field& b);

}  // namespace heatlab
