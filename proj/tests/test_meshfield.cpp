#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "heatlab/errors.hpp"
#include "heatlab/grid.hpp"
#include "heatlab/laplacian.hpp"
#include "heatlab/norms.hpp"
#include "heatlab/spectral.hpp"

using namespace heatlab;

namespace {

const double kPi = std::acos(-1.0);

Field fill_1d(const Grid& g, double (*fn)(double)) {
    Field f(g);
    for (int i = 0; i < g.nx(); ++i) f(i) = fn(g.x(i));
    return f;
}

Field random_field(const Grid& g, unsigned seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Field f(g);
    for (double& v : f.values) v = dist(rng);
    return f;
}

}  // namespace

TEST_CASE("domain and grid validation") {
    CHECK_THROWS_AS(Domain::interval(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Domain::interval_robin(1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_NOTHROW(Domain::interval_robin(1.0, 0.0, 2.0));
    CHECK_THROWS_AS(Grid(Domain::interval(1.0), 2), std::invalid_argument);
    Grid g(Domain::interval(1.0), 5);
    CHECK(g.spacing(0) == doctest::Approx(0.25));
    Grid g2(Domain::rectangle(2.0, 1.0), 5, 3);
    CHECK(g2.num_nodes() == 15);
    CHECK(g2.index(1, 2) == 11);  // row-major
}

TEST_CASE("laplacian of a constant is zero") {
    Grid g(Domain::interval(1.0), 17);
    Field f(g, 5.0);
    Field lap = laplacian(f, 3.0);
    for (double v : lap.values) CHECK(v == 0.0);
}

TEST_CASE("laplacian is exact on quadratics at interior nodes") {
    Grid g(Domain::interval(1.0), 33);
    Field f = fill_1d(g, [](double x) { return x * x; });
    Field lap = laplacian(f, 1.0);
    for (int i = 1; i < g.nx() - 1; ++i) {
        CHECK(lap(i) == doctest::Approx(2.0).epsilon(1e-12));
    }

    Grid g2(Domain::rectangle(1.0, 1.0), 17, 17);
    Field q(g2);
    for (int j = 0; j < 17; ++j)
        for (int i = 0; i < 17; ++i) q(i, j) = g2.x(i) * g2.x(i) + g2.y(j) * g2.y(j);
    Field lap2 = laplacian(q, 1.0);
    for (int j = 1; j < 16; ++j)
        for (int i = 1; i < 16; ++i) CHECK(lap2(i, j) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("laplacian of the neumann eigenmode cos(pi x)") {
    Grid g(Domain::interval(1.0), 257);
    Field f = fill_1d(g, [](double x) { return std::cos(kPi * x); });
    Field lap = laplacian(f, 1.0);
    double max_err = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        max_err = std::max(max_err, std::abs(lap(i) + kPi * kPi * std::cos(kPi * g.x(i))));
    }
    CHECK(max_err <= 1e-3);
}

TEST_CASE("laplacian rejects non-finite input") {
    Grid g(Domain::interval(1.0), 9);
    Field f(g, 1.0);
    f(4) = std::nan("");
    CHECK_THROWS_AS(laplacian(f, 1.0), invalid_field_error);
}

TEST_CASE("neumann laplacian integrates to zero (discrete divergence theorem)") {
    Grid g(Domain::interval(2.0), 41);
    Field f = random_field(g, 7, -3.0, 5.0);
    const double total = integrate(laplacian(f, 1.7));
    CHECK(std::abs(total) <= 1e-10 * norm_inf(laplacian(f, 1.7)));

    Grid g2(Domain::rectangle(1.0, 1.5), 21, 17);
    Field f2 = random_field(g2, 8, -1.0, 1.0);
    const double total2 = integrate(laplacian(f2, 0.3));
    CHECK(std::abs(total2) <= 1e-10 * (1.0 + norm_inf(laplacian(f2, 0.3))));
}

TEST_CASE("laplacian is linear") {
    Grid g(Domain::interval(1.0), 33);
    Field u = random_field(g, 1);
    Field v = random_field(g, 2);
    const double alpha = 2.25, beta = -0.5;
    Field combo(g);
    for (std::size_t k = 0; k < combo.values.size(); ++k) {
        combo.values[k] = alpha * u.values[k] + beta * v.values[k];
    }
    Field left = laplacian(combo, 1.0);
    Field lu = laplacian(u, 1.0), lv = laplacian(v, 1.0);
    for (std::size_t k = 0; k < left.values.size(); ++k) {
        const double rhs = alpha * lu.values[k] + beta * lv.values[k];
        CHECK(left.values[k] == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("robin laplacian matches a hand-built row") {
    // alpha du/dn + beta u = 0 with alpha=1, beta=2, h=0.5:
    // ghost = u1 - 2*h*beta*u0 = u1 - 2*u0, so (Lu)_0 = (2u1 - 4u0)/h^2.
    Grid g(Domain::interval_robin(1.0, 1.0, 2.0), 3);
    Field f(g);
    f(0) = 1.0;
    f(1) = 2.0;
    f(2) = 0.5;
    Field lap = laplacian(f, 1.0);
    const double h2 = 0.25;
    CHECK(lap(0) == doctest::Approx((2.0 * 2.0 - 4.0 * 1.0) / h2));
    CHECK(lap(1) == doctest::Approx((1.0 - 4.0 + 0.5) / h2));
    CHECK(lap(2) == doctest::Approx((2.0 * 2.0 - 4.0 * 0.5) / h2));
}

TEST_CASE("dirichlet laplacian pins boundary rows") {
    Grid g(Domain::interval(1.0, BoundaryKind::dirichlet), 5);
    Field f = fill_1d(g, [](double x) { return std::sin(kPi * x); });
    Field lap = laplacian(f, 1.0);
    CHECK(lap(0) == 0.0);
    CHECK(lap(4) == 0.0);
    CHECK(lap(2) < 0.0);  // -pi^2 sin at the peak
}

TEST_CASE("norm_p basics") {
    Grid g(Domain::interval(1.0), 65);
    Field one(g, 1.0);
    CHECK(norm_p(one, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norm_p(one, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norm_p(one, 7.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norm_p(one, std::numeric_limits<double>::infinity()) == 1.0);

    Field neg(g, -3.0);
    CHECK(norm_p(neg, std::numeric_limits<double>::infinity()) == 3.0);

    CHECK_THROWS_AS(norm_p(one, 0.5), std::invalid_argument);
}

TEST_CASE("norm_1 of sin(pi x) approaches 2/pi") {
    Grid g(Domain::interval(1.0), 1025);
    Field f = fill_1d(g, [](double x) { return std::sin(kPi * x); });
    CHECK(std::abs(norm_p(f, 1.0) - 2.0 / kPi) <= 1e-6);
}

TEST_CASE("holder inequality between norms") {
    Grid g(Domain::interval(2.0), 57);
    const double omega = g.domain.measure();
    for (unsigned seed = 0; seed < 8; ++seed) {
        Field f = random_field(g, 100 + seed, -2.0, 2.0);
        for (double p : {1.5, 2.0, 3.0, 10.0}) {
            const double bound = std::pow(omega, 1.0 - 1.0 / p) * norm_p(f, p);
            CHECK(norm_p(f, 1.0) <= bound + 1e-9);
        }
        CHECK(norm_p(f, 1.0) <= omega * norm_inf(f) + 1e-9);
    }
}

TEST_CASE("integrate basics") {
    Grid g(Domain::interval(2.0), 33);
    Field c(g, 3.0);
    CHECK(integrate(c) == doctest::Approx(6.0).epsilon(1e-13));

    Grid gu(Domain::interval(1.0), 129);
    Field lin = fill_1d(gu, [](double x) { return x; });
    CHECK(std::abs(integrate(lin) - 0.5) <= 1e-12);

    Grid gc(Domain::interval(1.0), 101);
    Field cosf = fill_1d(gc, [](double x) { return std::cos(2.0 * kPi * x); });
    CHECK(std::abs(integrate(cosf)) <= 1e-10);

    Grid g2(Domain::rectangle(2.0, 3.0), 9, 9);
    Field c2(g2, 1.5);
    CHECK(integrate(c2) == doctest::Approx(9.0).epsilon(1e-13));
}

TEST_CASE("spectral propagator: t=0 is the identity") {
    Grid g(Domain::interval(1.0), 257);
    Field f = random_field(g, 11, -1.0, 2.0);
    Field back = heat_propagate_spectral(f, 1.0, 0.0);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        CHECK(std::abs(back.values[k] - f.values[k]) <= 1e-12);
    }
}

TEST_CASE("spectral propagator: constants are invariant") {
    Grid g(Domain::interval(1.0), 65);
    Field f(g, 4.2);
    for (double t : {0.01, 0.5, 3.0}) {
        Field out = heat_propagate_spectral(f, 2.0, t);
        for (double v : out.values) CHECK(v == doctest::Approx(4.2).epsilon(1e-13));
    }
}

TEST_CASE("spectral propagator: eigenmode decays with the discrete eigenvalue") {
    Grid g(Domain::interval(1.0), 257);
    Field f = fill_1d(g, [](double x) { return std::cos(kPi * x); });
    NeumannHeatPropagator prop(g);
    const double t = 0.1;
    Field out = prop.propagate(f, 1.0, t);
    const double decay = std::exp(-prop.eigenvalue(0, 1) * t);
    for (int i = 0; i < g.nx(); ++i) {
        CHECK(std::abs(out(i) - decay * f(i)) <= 1e-12);
    }
}

TEST_CASE("spectral propagator: eigenmode matches continuum decay on a fine grid") {
    // The discrete eigenvalue differs from pi^2 by O(h^2); 8193 nodes push
    // that gap below the 1e-8 comparison tolerance.
    Grid g(Domain::interval(1.0), 8193);
    Field f = fill_1d(g, [](double x) { return std::cos(kPi * x); });
    Field out = heat_propagate_spectral(f, 1.0, 0.1);
    const double decay = std::exp(-kPi * kPi * 0.1);
    double max_err = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        max_err = std::max(max_err, std::abs(out(i) - decay * std::cos(kPi * g.x(i))));
    }
    CHECK(max_err <= 1e-8);
}

TEST_CASE("spectral propagator: semigroup law") {
    Grid g(Domain::interval(1.0), 129);
    Field f = random_field(g, 21, -1.0, 3.0);
    NeumannHeatPropagator prop(g);
    Field two_step = prop.propagate(prop.propagate(f, 1.0, 0.02), 1.0, 0.07);
    Field one_step = prop.propagate(f, 1.0, 0.09);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        CHECK(std::abs(two_step.values[k] - one_step.values[k]) <= 1e-10);
    }
}

TEST_CASE("spectral propagator: conserves mass and contracts the max norm") {
    Grid g(Domain::interval(1.0), 201);
    Field f = random_field(g, 31, 0.5, 2.5);
    const double mass0 = integrate(f);
    const double sup0 = norm_inf(f);
    for (double t : {1e-4, 1e-2, 0.5, 5.0}) {
        Field out = heat_propagate_spectral(f, 1.3, t);
        CHECK(std::abs(integrate(out) - mass0) <= 1e-10 * std::abs(mass0));
        CHECK(norm_inf(out) <= sup0 * (1.0 + 1e-12));
    }

    Grid g2(Domain::rectangle(1.0, 1.0), 33, 33);
    Field f2 = random_field(g2, 32, 0.0, 1.0);
    const double mass2 = integrate(f2);
    Field out2 = heat_propagate_spectral(f2, 0.7, 0.03);
    CHECK(std::abs(integrate(out2) - mass2) <= 1e-10 * (1.0 + std::abs(mass2)));
    CHECK(norm_inf(out2) <= norm_inf(f2) * (1.0 + 1e-12));
}

TEST_CASE("spectral propagator: 2D tensor mode decays as the eigenvalue sum") {
    Grid g(Domain::rectangle(1.0, 1.0), 33, 33);
    Field f(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            f(i, j) = std::cos(kPi * g.x(i)) * std::cos(2.0 * kPi * g.y(j));
    NeumannHeatPropagator prop(g);
    const double t = 0.05;
    const double decay = std::exp(-(prop.eigenvalue(0, 1) + prop.eigenvalue(1, 2)) * t);
    Field out = prop.propagate(f, 1.0, t);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        CHECK(std::abs(out.values[k] - decay * f.values[k]) <= 1e-11);
    }
}

TEST_CASE("spectral propagator rejects non-neumann boundaries") {
    Grid g(Domain::interval(1.0, BoundaryKind::dirichlet), 17);
    Field f(g, 1.0);
    CHECK_THROWS_AS(heat_propagate_spectral(f, 1.0, 0.1), unsupported_boundary_error);
}
