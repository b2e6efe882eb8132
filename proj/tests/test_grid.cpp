#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemolab/errors.hpp"
#include "chemolab/grid.hpp"
#include "test_support.hpp"

using namespace chemolab;
using chemolab::test::random_field;

TEST_CASE("build_grid computes widths and area") {
    const Grid g = build_grid(4, 4, 1.0, 1.0);
    CHECK(g.hx == 0.25);
    CHECK(g.hy == 0.25);
    CHECK(g.area == 1.0);

    const Grid r = build_grid(3, 5, 2.0, 1.0);
    CHECK(r.hx == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.hy == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(r.area == 2.0);
    CHECK(r.nx * r.ny * r.hx * r.hy == doctest::Approx(r.area).epsilon(1e-15));

    CHECK_THROWS_AS(build_grid(2, 4, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_grid(4, 2, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_grid(4, 4, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_grid(4, 4, 1.0, -1.0), ValidationError);
}

TEST_CASE("laplacian of a constant is zero") {
    const Grid g = build_grid(7, 5, 1.3, 0.7);
    const ScalarField lap = laplacian(ScalarField(g, 3.25));
    for (double v : lap.values()) CHECK(v == 0.0);
}

TEST_CASE("laplacian of a unit spike on a 3x3 grid") {
    const Grid g = build_grid(3, 3, 3.0, 3.0);
    ScalarField f(g);
    f(1, 1) = 1.0;
    const ScalarField lap = laplacian(f);
    CHECK(lap(1, 1) == -4.0);
    CHECK(lap(0, 1) == 1.0);
    CHECK(lap(2, 1) == 1.0);
    CHECK(lap(1, 0) == 1.0);
    CHECK(lap(1, 2) == 1.0);
    CHECK(lap(0, 0) == 0.0);
    CHECK(lap(2, 0) == 0.0);
    CHECK(lap(0, 2) == 0.0);
    CHECK(lap(2, 2) == 0.0);
}

TEST_CASE("cos(pi x/lx) is a discrete Neumann eigenfield") {
    for (int n : {5, 16, 33}) {
        const double lx = 2.0;
        const Grid g = build_grid(n, 4, lx, 1.0);
        const ScalarField f = sample(g, [&](double x, double) { return std::cos(std::numbers::pi * x / lx); });
        const ScalarField lap = laplacian(f);
        const double lambda = 2.0 / (g.hx * g.hx) * (1.0 - std::cos(std::numbers::pi * g.hx / lx));
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(lap[k] == doctest::Approx(-lambda * f[k]).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("face_gradient") {
    SUBCASE("constant field") {
        const Grid g = build_grid(4, 3, 1.0, 1.0);
        const FluxField d = face_gradient(ScalarField(g, 2.0));
        for (double v : d.x_faces) CHECK(v == 0.0);
        for (double v : d.y_faces) CHECK(v == 0.0);
    }
    SUBCASE("f = x") {
        const Grid g = build_grid(8, 5, 1.0, 1.0);
        const FluxField d = face_gradient(sample(g, [](double x, double) { return x; }));
        for (int j = 0; j < g.ny; ++j) {
            CHECK(d.x(0, j) == 0.0);
            CHECK(d.x(g.nx, j) == 0.0);
            for (int i = 1; i < g.nx; ++i) CHECK(d.x(i, j) == doctest::Approx(1.0).epsilon(1e-13));
        }
        for (double v : d.y_faces) CHECK(v == 0.0);
    }
    SUBCASE("random 3x3 against index-by-index oracle") {
        const Grid g = build_grid(3, 3, 1.5, 0.9);
        const ScalarField f = random_field(g, 7);
        const FluxField d = face_gradient(f);
        const double* v = f.values().data();
        // x-faces at i = 1, 2 of row j: (v[j*3+i] - v[j*3+i-1]) / 0.5
        for (int j = 0; j < 3; ++j) {
            CHECK(d.x(0, j) == 0.0);
            CHECK(d.x(3, j) == 0.0);
            CHECK(d.x(1, j) == doctest::Approx((v[j * 3 + 1] - v[j * 3 + 0]) / 0.5));
            CHECK(d.x(2, j) == doctest::Approx((v[j * 3 + 2] - v[j * 3 + 1]) / 0.5));
        }
        for (int i = 0; i < 3; ++i) {
            CHECK(d.y(i, 0) == 0.0);
            CHECK(d.y(i, 3) == 0.0);
            CHECK(d.y(i, 1) == doctest::Approx((v[3 + i] - v[i]) / 0.3));
            CHECK(d.y(i, 2) == doctest::Approx((v[6 + i] - v[3 + i]) / 0.3));
        }
    }
}

TEST_CASE("div_chemotaxis_flux") {
    const Grid g = build_grid(6, 5, 1.0, 1.0);
    SUBCASE("w constant gives zero") {
        const ScalarField out = div_chemotaxis_flux(random_field(g, 1, 0.0, 2.0), ScalarField(g, 0.7), 0.5);
        for (double v : out.values()) CHECK(v == 0.0);
    }
    SUBCASE("u constant gives chi c laplacian(w)") {
        const ScalarField w = random_field(g, 2);
        const ScalarField out = div_chemotaxis_flux(ScalarField(g, 1.5), w, 0.4);
        const ScalarField lap = laplacian(w);
        for (std::size_t k = 0; k < w.size(); ++k) CHECK(out[k] == doctest::Approx(0.4 * 1.5 * lap[k]).epsilon(1e-12));
    }
    SUBCASE("3x3 hand case") {
        // w = 0, 1, 3 and u = 1, 2, 4 along every row, h = 1, chi = 0.5.
        // x-face fluxes: 0.5 * 1.5 * 1 = 0.75 and 0.5 * 3 * 2 = 3.
        const Grid h = build_grid(3, 3, 3.0, 3.0);
        ScalarField u(h), w(h);
        for (int j = 0; j < 3; ++j) {
            w(0, j) = 0.0, w(1, j) = 1.0, w(2, j) = 3.0;
            u(0, j) = 1.0, u(1, j) = 2.0, u(2, j) = 4.0;
        }
        const ScalarField out = div_chemotaxis_flux(u, w, 0.5);
        for (int j = 0; j < 3; ++j) {
            CHECK(out(0, j) == doctest::Approx(0.75));
            CHECK(out(1, j) == doctest::Approx(2.25));
            CHECK(out(2, j) == doctest::Approx(-3.0));
        }
    }
    SUBCASE("upwind takes the donor along the drift") {
        const Grid h = build_grid(3, 3, 3.0, 3.0);
        ScalarField u(h), w(h);
        for (int j = 0; j < 3; ++j) {
            w(0, j) = 0.0, w(1, j) = 1.0, w(2, j) = 3.0;
            u(0, j) = 1.0, u(1, j) = 2.0, u(2, j) = 4.0;
        }
        // drift -chi grad w points toward lower i, so the donor is the upper cell
        const ScalarField out = div_chemotaxis_flux(u, w, 0.5, FaceScheme::upwind);
        for (int j = 0; j < 3; ++j) {
            CHECK(out(0, j) == doctest::Approx(1.0));
            CHECK(out(1, j) == doctest::Approx(4.0 - 1.0));
            CHECK(out(2, j) == doctest::Approx(-4.0));
        }
    }
}

TEST_CASE("integrate") {
    CHECK(integrate(ScalarField(build_grid(5, 5, 1.0, 1.0), 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integrate(ScalarField(build_grid(8, 4, 2.0, 1.0), 3.5)) == doctest::Approx(7.0).epsilon(1e-15));
    for (int n : {3, 10, 64}) {
        const Grid g = build_grid(n, n + 1, 1.0, 1.0);
        CHECK(integrate(sample(g, [](double x, double) { return x; })) == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("grad_lp_norm") {
    const Grid g = build_grid(16, 16, 1.0, 1.0);
    CHECK(grad_lp_norm(ScalarField(g, 4.0), 3.0) == 0.0);
    CHECK(grad_lp_norm(sample(g, [](double x, double) { return x; }), 2.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(grad_lp_norm(sample(g, [](double x, double y) { return x + y; }), 4.0) ==
          doctest::Approx(4.0).epsilon(1e-13));
    CHECK_THROWS_AS(grad_lp_norm(ScalarField(g), 0.5), ValidationError);
}

TEST_CASE("discrete divergence theorem on random fields") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Grid g = build_grid(5 + static_cast<int>(seed), 7 + static_cast<int>(seed % 5), 1.0 + 0.1 * seed, 0.8);
        const ScalarField f = random_field(g, seed, -5.0, 5.0);
        const ScalarField u = random_field(g, seed + 100, 0.0, 3.0);
        CHECK(std::abs(integrate(laplacian(f))) <= 1e-13 * f.max_abs() * g.area);
        const double s = std::abs(integrate(div_chemotaxis_flux(u, f, 0.7)));
        CHECK(s <= 1e-13 * u.max_abs() * f.max_abs() * g.area);
    }
}

TEST_CASE("linearity") {
    const Grid g = build_grid(9, 6, 1.0, 1.0);
    const ScalarField a = random_field(g, 11), b = random_field(g, 12), u = random_field(g, 13, 0.0, 1.0);
    const ScalarField lhs = laplacian(2.5 * a + b);
    const ScalarField rhs = 2.5 * laplacian(a) + laplacian(b);
    CHECK(chemolab::test::max_abs_diff(lhs, rhs) <= 1e-11);
    const ScalarField c1 = div_chemotaxis_flux(u, 2.5 * a + b, 0.3);
    const ScalarField c2 = 2.5 * div_chemotaxis_flux(u, a, 0.3) + div_chemotaxis_flux(u, b, 0.3);
    CHECK(chemolab::test::max_abs_diff(c1, c2) <= 1e-11);
    const ScalarField d1 = div_chemotaxis_flux(2.5 * u + a, b, 0.3);
    const ScalarField d2 = 2.5 * div_chemotaxis_flux(u, b, 0.3) + div_chemotaxis_flux(a, b, 0.3);
    CHECK(chemolab::test::max_abs_diff(d1, d2) <= 1e-11);
}

TEST_CASE("reflection symmetry of the laplacian") {
    const Grid g = build_grid(8, 8, 1.0, 1.0);
    const ScalarField f = random_field(g, 5);
    ScalarField fx(g), fy(g);
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
            fx(i, j) = f(7 - i, j);
            fy(i, j) = f(i, 7 - j);
        }
    }
    const ScalarField l = laplacian(f), lx = laplacian(fx), ly = laplacian(fy);
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
            CHECK(lx(i, j) == doctest::Approx(l(7 - i, j)).epsilon(1e-13).scale(1.0));
            CHECK(ly(i, j) == doctest::Approx(l(i, 7 - j)).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("compensated summation") {
    CompensatedSum s;
    s += 1.0;
    for (int k = 0; k < 1000; ++k) s += 1e-16;
    s += -1.0;
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-6));
}
