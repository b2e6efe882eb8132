#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemolab/errors.hpp"
#include "chemolab/linear_solver.hpp"
#include "chemolab/solver.hpp"
#include "test_support.hpp"

using namespace chemolab;

namespace {

Params power(double chi, double beta) {
    Params p;
    p.chi = chi;
    p.beta = beta;
    return p;
}

State transformed(const ScalarField& u, const ScalarField& w) {
    return State{u, w, 0.0, Formulation::transformed};
}

}  // namespace

TEST_CASE("uniform density over a flat signal") {
    const Grid g = build_grid(16, 12, 1.0, 0.75);
    const Params p = power(0.5, 0.5);
    const double c = 2.25, dt = 1e-3;
    auto [next, rep] = step(transformed(ScalarField(g, c), ScalarField(g, 0.0)), p, dt);
    CHECK(next.t == dt);
    CHECK(rep.dt_used == dt);
    for (double v : next.u.values()) CHECK(std::abs(v - c) <= 1e-14);
    for (double v : next.signal.values()) CHECK(std::abs(v - dt * 1.5) <= 1e-15);
}

TEST_CASE("zero density keeps a constant signal fixed") {
    const Grid g = build_grid(10, 10, 1.0, 1.0);
    State s = transformed(ScalarField(g, 0.0), ScalarField(g, 0.7));
    for (int n = 0; n < 20; ++n) s = step(s, power(0.5, 0.5), 1e-2).first;
    for (double v : s.u.values()) CHECK(v == 0.0);
    for (double v : s.signal.values()) CHECK(std::abs(v - 0.7) <= 1e-14);
}

TEST_CASE("explicit-only step on a 3x3 spike") {
    const Grid g = build_grid(3, 3, 1.0, 1.0);
    ScalarField u(g, 0.0);
    u(1, 1) = 9.0;
    StepOptions opts;
    opts.explicit_only = true;
    const double dt = 1e-3;
    auto [next, rep] = step(transformed(u, ScalarField(g, 0.0)), power(0.5, 0.5), dt, opts);
    // Lap u at the centre = -4 * 9 / h^2 = -324, each edge neighbour gets 9 / h^2 = 81
    CHECK(next.u(1, 1) == doctest::Approx(9.0 - 0.324).epsilon(1e-14));
    for (auto [i, j] : {std::pair{0, 1}, {2, 1}, {1, 0}, {1, 2}}) CHECK(next.u(i, j) == doctest::Approx(0.081).epsilon(1e-13));
    for (auto [i, j] : {std::pair{0, 0}, {2, 0}, {0, 2}, {2, 2}}) CHECK(next.u(i, j) == 0.0);
    CHECK(next.signal(1, 1) == doctest::Approx(3e-3).epsilon(1e-14));
    CHECK(next.signal(0, 0) == 0.0);
    CHECK(rep.cg_iterations == 0);
}

TEST_CASE("explicit-only chemotaxis across columns") {
    // h = 1/3; u = 1 in column 0, w = 1 in column 1. Face drift 3, central face density 1/2.
    const Grid g = build_grid(3, 3, 1.0, 1.0);
    const ScalarField u = sample(g, [](double x, double) { return x < 1.0 / 3.0 ? 1.0 : 0.0; });
    const ScalarField w = sample(g, [](double x, double) { return x > 1.0 / 3.0 && x < 2.0 / 3.0 ? 1.0 : 0.0; });
    StepOptions opts;
    opts.explicit_only = true;
    opts.positivity = PositivityMode::none;
    const double dt = 1e-3, chi = 0.5;
    auto [next, rep] = step(transformed(u, w), power(chi, 0.5), dt, opts);
    // chi div(u grad w) in column 0: chi * 0.5 * 3 / h = 2.25; Lap u = -9
    for (int j = 0; j < 3; ++j) {
        CHECK(next.u(0, j) == doctest::Approx(1.0 + dt * (-9.0 + 2.25)).epsilon(1e-14));
        CHECK(next.u(1, j) == doctest::Approx(dt * (9.0 - 2.25)).epsilon(1e-13));
        CHECK(next.u(2, j) == 0.0);
    }
    CHECK(integrate(next.u) == doctest::Approx(integrate(u)).epsilon(1e-15));
}

TEST_CASE("original formulation decays v exponentially") {
    const Grid g = build_grid(8, 8, 1.0, 1.0);
    Params p = power(0.5, 0.5);
    p.v0_max = 2.0;
    State s{ScalarField(g, 4.0), ScalarField(g, 2.0), 0.0, Formulation::original};
    const double dt = 5e-3;
    for (int n = 0; n < 10; ++n) s = step(s, p, dt).first;
    const double expected = 2.0 * std::exp(-2.0 * 10 * dt);
    for (double v : s.signal.values()) CHECK(v == doctest::Approx(expected).epsilon(1e-13));
    for (double v : s.u.values()) CHECK(v == doctest::Approx(4.0).epsilon(1e-14));
    // w view grows linearly at rate f(4) = 2
    const ScalarField wv = signal_as_w(s, p);
    for (double w : wv.values()) CHECK(w == doctest::Approx(2.0 * 10 * dt).epsilon(1e-12));

    StepOptions euler;
    euler.v_decay = DecayMode::explicit_euler;
    const State e = step(State{ScalarField(g, 4.0), ScalarField(g, 2.0), 0.0, Formulation::original}, p, dt, euler).first;
    CHECK(e.signal(3, 3) == doctest::Approx(2.0 * (1.0 - 2.0 * dt)).epsilon(1e-14));
}

TEST_CASE("formulation mismatch and bad dt") {
    const Grid g = build_grid(4, 4, 1.0, 1.0);
    State s = transformed(ScalarField(g, 1.0), ScalarField(g, 0.0));
    CHECK_THROWS_AS(step_original(s, power(0.5, 0.5), 1e-3), ValidationError);
    CHECK_THROWS_AS(step(s, power(0.5, 0.5), 0.0), ValidationError);
    CHECK_THROWS_AS(step(s, power(0.5, 0.5), -1e-3), ValidationError);
}

TEST_CASE("adaptive_dt") {
    const Grid g = build_grid(50, 50, 1.0, 1.0);
    const ScalarField w = sample(g, [](double x, double) { return 20.0 * x; });
    const State s = transformed(ScalarField(g, 1.0), w);
    // 0.4 * 0.02 / (0.5 * 20)
    CHECK(adaptive_dt(s, power(0.5, 0.5)) == doctest::Approx(8e-4).epsilon(1e-12));
    CHECK(adaptive_dt(s, power(0.25, 0.5)) == doctest::Approx(1.6e-3).epsilon(1e-12));
    CHECK(adaptive_dt(s, power(0.25, 0.5)) / adaptive_dt(s, power(0.5, 0.5)) == doctest::Approx(2.0).epsilon(1e-12));
    // flat signal: dt_max
    CHECK(adaptive_dt(transformed(ScalarField(g, 1.0), ScalarField(g, 0.0)), power(0.5, 0.5)) == 1e-2);
    StepOptions o;
    o.dt_max = 1e-4;
    CHECK(adaptive_dt(s, power(0.5, 0.5), o) == 1e-4);
}

TEST_CASE("grad_sq_product") {
    const Grid g = build_grid(20, 10, 2.0, 1.0);
    const ScalarField w = sample(g, [](double x, double y) { return 3.0 * x - 2.0 * y; });
    const ScalarField q = grad_sq_product(w);
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) CHECK(q(i, j) == doctest::Approx(13.0).epsilon(1e-12));
    }
    // one-sided difference across the boundary is zero
    CHECK(q(0, 5) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(q(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    // nonpositive at a discrete minimum
    ScalarField bowl = sample(g, [](double x, double y) { return (x - 1.05) * (x - 1.05) + (y - 0.45) * (y - 0.45); });
    const ScalarField qb = grad_sq_product(bowl);
    double at_min = 1.0;
    int imin = 0;
    for (std::size_t k = 1; k < bowl.size(); ++k) {
        if (bowl[k] < bowl[imin]) imin = static_cast<int>(k);
    }
    at_min = qb[imin];
    CHECK(at_min <= 0.0);
}

TEST_CASE("mass conservation over many steps") {
    const Grid g = build_grid(24, 20, 1.2, 1.0);
    const ScalarField u0 = test::random_field(g, 11, 0.1, 2.0);
    const ScalarField w0 = sample(g, [](double x, double y) {
        return 0.5 * (1.0 - std::cos(std::numbers::pi * x / 1.2) * std::cos(std::numbers::pi * y));
    });
    const Params p = power(0.9, 0.9);
    for (Formulation f : {Formulation::transformed, Formulation::original}) {
        State s{u0, f == Formulation::transformed ? w0 : w_to_v(w0, p), 0.0, f};
        const double m0 = integrate(s.u);
        for (int n = 0; n < 200; ++n) s = step(s, p, adaptive_dt(s, p)).first;
        CHECK(std::abs(integrate(s.u) - m0) <= 1e-12 * m0);
        CHECK(s.u.min() >= 0.0);
    }
}

TEST_CASE("positivity modes on a harsh drift") {
    const Grid g = build_grid(8, 8, 1.0, 1.0);
    const ScalarField u = test::random_field(g, 3, 0.0, 1.0);
    const ScalarField w = sample(g, [](double x, double y) { return 50.0 * x * x + 30.0 * y; });
    const Params p = power(0.9, 0.5);
    const double dt = 2e-2;
    const double m0 = integrate(u);

    StepOptions lim;
    auto [sl, rl] = step(transformed(u, w), p, dt, lim);
    CHECK(rl.limited_cells > 0);
    CHECK(rl.max_cfl > 1.0);
    CHECK(sl.u.min() >= 0.0);
    CHECK(std::abs(integrate(sl.u) - m0) <= 1e-13 * m0);
    CHECK(rl.positivity_clip_mass == 0.0);

    StepOptions clip;
    clip.positivity = PositivityMode::clip;
    auto [sc, rc] = step(transformed(u, w), p, dt, clip);
    CHECK(rc.positivity_clip_mass > 0.0);
    CHECK(sc.u.min() >= 0.0);
    CHECK(integrate(sc.u) == doctest::Approx(m0 + rc.positivity_clip_mass).epsilon(1e-12));

    StepOptions none;
    none.positivity = PositivityMode::none;
    none.explicit_only = true;
    CHECK_THROWS_AS(step(transformed(u, w), p, dt, none), PositivityError);
}

TEST_CASE("implicit diffusion solve") {
    const Grid g = build_grid(32, 24, 1.0, 0.75);
    const double dt = 1e-2;
    SUBCASE("residual and mean") {
        const ScalarField b = test::random_field(g, 5, 0.0, 3.0);
        ScalarField x;
        const CgResult r = solve_implicit_diffusion(b, dt, x);
        CHECK(r.iterations > 0);
        std::vector<double> y(b.size());
        apply_helmholtz(g, x.values(), y, dt);
        // warm start x = b gives r0 = dt Lap b
        const ScalarField r0 = dt * laplacian(b);
        double rn = 0.0, r0n = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            rn += (y[k] - b[k]) * (y[k] - b[k]);
            r0n += r0[k] * r0[k];
        }
        CHECK(std::sqrt(rn) <= 2e-12 * std::sqrt(r0n));
        CHECK(std::abs(integrate(x) - integrate(b)) <= 1e-14 * integrate(b));
    }
    SUBCASE("discrete eigenmode") {
        const double lx = 1.0;
        const ScalarField b = sample(g, [&](double x, double) { return std::cos(2.0 * std::numbers::pi * x / lx); });
        const double h = g.hx;
        const double lambda = (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * h / lx)) / (h * h);
        ScalarField x;
        solve_implicit_diffusion(b, dt, x);
        for (std::size_t k = 0; k < b.size(); ++k) CHECK(std::abs(x[k] - b[k] / (1.0 + dt * lambda)) <= 1e-11);
    }
    SUBCASE("iteration cap") {
        CgOptions o;
        o.max_iterations = 1;
        const ScalarField b = test::random_field(g, 6);
        ScalarField x;
        CHECK_THROWS_AS(solve_implicit_diffusion(b, 1.0, x, o), SolverDivergence);
    }
}
