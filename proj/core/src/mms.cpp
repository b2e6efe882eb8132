#include "chemolab/mms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chemolab/config.hpp"
#include "chemolab/errors.hpp"
#include "chemolab/initial_data.hpp"
#include "chemolab/linear_solver.hpp"

namespace chemolab {

namespace {

struct Manufactured {
    double kx;
    double ky;
    double chi;
    Params p;

    [[nodiscard]] double u(double x, double y, double t) const {
        return 1.0 + 0.5 * std::cos(kx * x) * std::cos(ky * y) * std::exp(-t);
    }
    [[nodiscard]] double w(double x, double y, double t) const {
        return 0.5 + 0.25 * std::cos(2.0 * kx * x) * std::cos(ky * y) * (1.0 + t);
    }
    [[nodiscard]] double lap_u(double x, double y, double t) const {
        return -(kx * kx + ky * ky) * (u(x, y, t) - 1.0);
    }
    [[nodiscard]] double source_diffusion(double x, double y, double t) const {
        return -(u(x, y, t) - 1.0) - lap_u(x, y, t);
    }
    [[nodiscard]] double source_u(double x, double y, double t) const {
        const double e = std::exp(-t);
        const double cx = std::cos(kx * x), sx = std::sin(kx * x);
        const double cy = std::cos(ky * y), sy = std::sin(ky * y);
        const double c2x = std::cos(2.0 * kx * x), s2x = std::sin(2.0 * kx * x);
        const double ut = -0.5 * cx * cy * e;
        const double ux = -0.5 * kx * sx * cy * e, uy = -0.5 * ky * cx * sy * e;
        const double wx = -0.5 * kx * s2x * cy * (1.0 + t), wy = -0.25 * ky * c2x * sy * (1.0 + t);
        const double lapw = -0.25 * (4.0 * kx * kx + ky * ky) * c2x * cy * (1.0 + t);
        return ut - lap_u(x, y, t) - chi * (ux * wx + uy * wy + u(x, y, t) * lapw);
    }
    [[nodiscard]] double source_w(double x, double y, double t) const {
        const double cy = std::cos(ky * y), sy = std::sin(ky * y);
        const double c2x = std::cos(2.0 * kx * x), s2x = std::sin(2.0 * kx * x);
        const double wt = 0.25 * c2x * cy;
        const double wx = -0.5 * kx * s2x * cy * (1.0 + t), wy = -0.25 * ky * c2x * sy * (1.0 + t);
        const double lapw = -0.25 * (4.0 * kx * kx + ky * ky) * c2x * cy * (1.0 + t);
        return wt - lapw + wx * wx + wy * wy - f_eval(u(x, y, t), p);
    }
};

double max_error(const ScalarField& a, const ScalarField& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

}  // namespace

std::vector<MmsLevel> mms_convergence(MmsCase which, int levels, const MmsOptions& opts) {
    if (levels < 3) throw ValidationError("mms_convergence needs levels >= 3");
    Manufactured ms{std::numbers::pi / opts.lx, std::numbers::pi / opts.ly, opts.chi, Params{}};
    ms.p.chi = opts.chi;
    ms.p.beta = opts.beta;
    ms.p.domain_area = opts.lx * opts.ly;
    validate(ms.p);

    std::vector<MmsLevel> out;
    for (int k = 0; k < levels; ++k) {
        const int n = opts.start_n << k;
        const Grid g = build_grid(n, n, opts.lx, opts.ly);
        MmsLevel lv;
        lv.n = n;
        lv.h = g.h_min();
        lv.steps = static_cast<int>(std::ceil(opts.t_end / (opts.dt_factor * lv.h * lv.h)));
        lv.dt = opts.t_end / lv.steps;

        if (which == MmsCase::diffusion) {
            ScalarField u = sample(g, [&](double x, double y) { return ms.u(x, y, 0.0); });
            for (int s = 1; s <= lv.steps; ++s) {
                const double t1 = s * lv.dt;
                ScalarField b = u;
                for (int j = 0; j < g.ny; ++j) {
                    for (int i = 0; i < g.nx; ++i) b(i, j) += lv.dt * ms.source_diffusion(g.x(i), g.y(j), t1);
                }
                solve_implicit_diffusion(b, lv.dt, u);
            }
            lv.error = max_error(u, sample(g, [&](double x, double y) { return ms.u(x, y, opts.t_end); }));
        } else {
            const Formulation form = which == MmsCase::transformed ? Formulation::transformed : Formulation::original;
            auto signal_exact = [&](double x, double y, double t) {
                const double w = ms.w(x, y, t);
                return form == Formulation::transformed ? w : std::exp(-w);
            };
            State s{sample(g, [&](double x, double y) { return ms.u(x, y, 0.0); }),
                    sample(g, [&](double x, double y) { return signal_exact(x, y, 0.0); }), 0.0, form};
            StepOptions so;
            so.dt_max = lv.dt;
            for (int step_no = 0; step_no < lv.steps; ++step_no) {
                const double t0 = step_no * lv.dt;
                SourceTerms src{sample(g, [&](double x, double y) { return ms.source_u(x, y, t0); }),
                                sample(g, [&](double x, double y) {
                                    const double sw = ms.source_w(x, y, t0);
                                    return form == Formulation::transformed ? sw : -std::exp(-ms.w(x, y, t0)) * sw;
                                })};
                auto [next, rep] = step(s, ms.p, lv.dt, so, &src);
                s = std::move(next);
                s.t = (step_no + 1) * lv.dt;
            }
            const double eu = max_error(s.u, sample(g, [&](double x, double y) { return ms.u(x, y, opts.t_end); }));
            const double es = max_error(
                s.signal, sample(g, [&](double x, double y) { return signal_exact(x, y, opts.t_end); }));
            lv.error = std::max(eu, es);
        }
        out.push_back(lv);
    }
    return out;
}

std::vector<double> observed_orders(std::span<const MmsLevel> levels) {
    std::vector<double> orders;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        orders.push_back(std::log2(levels[k].error / levels[k + 1].error));
    }
    return orders;
}

std::vector<ConsistencyLevel> formulation_consistency(int levels, const ConsistencyOptions& opts) {
    if (levels < 2) throw ValidationError("formulation_consistency needs levels >= 2");
    std::vector<ConsistencyLevel> out;
    for (int k = 0; k < levels; ++k) {
        ExperimentConfig cfg;
        // h^2 halves per level: n grows by sqrt(2), rounded to the nearest integer
        cfg.nx = cfg.ny = static_cast<int>(std::lround(opts.start_n * std::pow(2.0, 0.5 * k)));
        cfg.chi = opts.chi;
        cfg.beta = opts.beta;
        cfg.initial.mass = opts.mass;
        cfg.initial.preset = InitialPreset::bump;
        cfg.initial.center_x = 0.4;
        cfg.initial.center_y = 0.55;
        cfg.initial.width = 0.25;
        cfg.initial.v0_profile = V0Profile::smooth;
        cfg.formulation = Formulation::original;
        const InitialCondition ic = make_initial_condition(cfg);
        State orig = ic.state;
        State trans{orig.u, v_to_w(orig.signal, ic.params), 0.0, Formulation::transformed};

        ConsistencyLevel lv;
        lv.n = cfg.nx;
        lv.h = 1.0 / cfg.nx;
        const int steps = static_cast<int>(std::llround(opts.t_end / opts.dt0)) << k;
        lv.dt = opts.t_end / steps;
        StepOptions so;
        so.dt_max = lv.dt;
        for (int s = 0; s < steps; ++s) {
            orig = step(orig, ic.params, lv.dt, so).first;
            trans = step(trans, ic.params, lv.dt, so).first;
        }
        lv.error = max_error(orig.signal, w_to_v(trans.signal, ic.params));
        out.push_back(lv);
    }
    return out;
}

}  // namespace chemolab
