#include "chemolab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemolab/errors.hpp"

namespace chemolab {

namespace {

/// Per-face drift potential jump, the discrete analogue of (w_hi - w_lo).
FluxField drift_jumps(const State& s) {
    const ScalarField& sig = s.signal;
    const Grid& g = sig.grid();
    FluxField d(g);
    const bool transformed = s.formulation == Formulation::transformed;
    auto jump = [transformed](double lo, double hi) {
        // grad w = -grad v / v, with v taken as the face mean
        return transformed ? hi - lo : -2.0 * (hi - lo) / (hi + lo);
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) d.x(i, j) = jump(sig(i - 1, j), sig(i, j));
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) d.y(i, j) = jump(sig(i, j - 1), sig(i, j));
    }
    return d;
}

FluxField chemotaxis_fluxes(const ScalarField& u, const FluxField& jumps, double chi, FaceScheme scheme) {
    const Grid& g = u.grid();
    FluxField f(g);
    auto face = [scheme](double lo, double hi, double dw) {
        if (scheme == FaceScheme::central) return 0.5 * (lo + hi);
        return dw > 0.0 ? hi : lo;
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const double dw = jumps.x(i, j);
            f.x(i, j) = chi * face(u(i - 1, j), u(i, j), dw) * dw / g.hx;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double dw = jumps.y(i, j);
            f.y(i, j) = chi * face(u(i, j - 1), u(i, j), dw) * dw / g.hy;
        }
    }
    return f;
}

// A positive face flux carries mass out of the upper cell (i or j), a negative one
// out of the lower cell.
int limit_outflow(FluxField& f, const ScalarField& u, double dt) {
    const Grid& g = u.grid();
    ScalarField ratio(g, 1.0);
    int limited = 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double out = 0.0;
            if (f.x(i, j) > 0.0) out += f.x(i, j) / g.hx;
            if (f.x(i + 1, j) < 0.0) out -= f.x(i + 1, j) / g.hx;
            if (f.y(i, j) > 0.0) out += f.y(i, j) / g.hy;
            if (f.y(i, j + 1) < 0.0) out -= f.y(i, j + 1) / g.hy;
            const double budget = std::max(u(i, j), 0.0);
            if (dt * out > budget) {
                ratio(i, j) = budget / (dt * out);
                ++limited;
            }
        }
    }
    if (limited == 0) return 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            double& fx = f.x(i, j);
            fx *= fx > 0.0 ? ratio(i, j) : ratio(i - 1, j);
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double& fy = f.y(i, j);
            fy *= fy > 0.0 ? ratio(i, j) : ratio(i, j - 1);
        }
    }
    return limited;
}

ScalarField divergence(const FluxField& f) {
    const Grid& g = f.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out(i, j) = (f.x(i + 1, j) - f.x(i, j)) / g.hx + (f.y(i, j + 1) - f.y(i, j)) / g.hy;
        }
    }
    return out;
}

double max_jump_gradient(const FluxField& d) {
    const Grid& g = d.grid;
    double m = 0.0;
    for (double v : d.x_faces) m = std::max(m, std::abs(v) / g.hx);
    for (double v : d.y_faces) m = std::max(m, std::abs(v) / g.hy);
    return m;
}

void require_formulation(const State& s, Formulation f, const char* who) {
    if (s.formulation != f) throw ValidationError(std::string(who) + ": state has the wrong formulation");
}

/// Explicit chemotaxis update of u, with the configured positivity treatment.
ScalarField advance_density_explicit(const State& s, const Params& p, double dt, const StepOptions& opts,
                                     const SourceTerms* src, StepReport& report) {
    const Grid& g = s.u.grid();
    const FluxField jumps = drift_jumps(s);
    FluxField flux = chemotaxis_fluxes(s.u, jumps, p.chi, opts.face_scheme);
    if (opts.positivity == PositivityMode::limiter) report.limited_cells = limit_outflow(flux, s.u, dt);
    const ScalarField div = divergence(flux);

    ScalarField ustar(g);
    for (std::size_t k = 0; k < ustar.size(); ++k) ustar[k] = s.u[k] + dt * div[k];
    if (opts.explicit_only) {
        const ScalarField lap = laplacian(s.u);
        for (std::size_t k = 0; k < ustar.size(); ++k) ustar[k] += dt * lap[k];
    }
    if (src) {
        for (std::size_t k = 0; k < ustar.size(); ++k) ustar[k] += dt * src->u[k];
    }
    if (opts.positivity == PositivityMode::clip) {
        double added = 0.0;
        for (double& v : ustar.values()) {
            if (v < 0.0) {
                added -= v;
                v = 0.0;
            }
        }
        report.positivity_clip_mass = added * g.cell_area();
    }
    report.max_cfl = dt * p.chi * max_jump_gradient(jumps) / g.h_min();
    return ustar;
}

ScalarField diffuse(const ScalarField& rhs, double dt, const StepOptions& opts, StepReport& report) {
    if (opts.explicit_only) return rhs;
    ScalarField out;
    report.cg_iterations += solve_implicit_diffusion(rhs, dt, out, opts.cg).iterations;
    return out;
}

void check_density(const ScalarField& u, const StepOptions& opts, double t) {
    if (!u.all_finite()) throw NumericalError("density became non-finite near t = " + std::to_string(t));
    const double lo = u.min();
    if (lo < -opts.u_negative_tol) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "density positivity lost: min u = " << lo << " at t = " << t;
        throw PositivityError(msg.str());
    }
}

}  // namespace

ScalarField signal_as_w(const State& s, const Params& p) {
    return s.formulation == Formulation::transformed ? s.signal : v_to_w(s.signal, p);
}

ScalarField signal_as_v(const State& s, const Params& p) {
    return s.formulation == Formulation::original ? s.signal : w_to_v(s.signal, p);
}

ScalarField grad_sq_product(const ScalarField& w) {
    const Grid& g = w.grid();
    ScalarField out(g);
    const double cx = 1.0 / (g.hx * g.hx);
    const double cy = 1.0 / (g.hy * g.hy);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = w(i, j);
            const double xm = i > 0 ? c - w(i - 1, j) : 0.0;
            const double xp = i + 1 < g.nx ? w(i + 1, j) - c : 0.0;
            const double ym = j > 0 ? c - w(i, j - 1) : 0.0;
            const double yp = j + 1 < g.ny ? w(i, j + 1) - c : 0.0;
            out(i, j) = cx * xm * xp + cy * ym * yp;
        }
    }
    return out;
}

double max_drift_gradient(const State& s) { return max_jump_gradient(drift_jumps(s)); }

std::pair<State, StepReport> step_transformed(const State& s, const Params& p, double dt, const StepOptions& opts,
                                              const SourceTerms* src) {
    require_formulation(s, Formulation::transformed, "step_transformed");
    if (!(dt > 0.0)) throw ValidationError("step_transformed: dt must be positive");
    StepReport report;
    report.dt_used = dt;
    const Grid& g = s.u.grid();

    const ScalarField ustar = advance_density_explicit(s, p, dt, opts, src, report);

    const ScalarField& w = s.signal;
    const ScalarField gsq = grad_sq_product(w);
    ScalarField wstar(g);
    for (std::size_t k = 0; k < w.size(); ++k) {
        wstar[k] = w[k] + dt * (f_eval(std::max(s.u[k], 0.0), p) - gsq[k]);
    }
    if (opts.explicit_only) {
        const ScalarField lap = laplacian(w);
        for (std::size_t k = 0; k < w.size(); ++k) wstar[k] += dt * lap[k];
    }
    if (src) {
        for (std::size_t k = 0; k < w.size(); ++k) wstar[k] += dt * src->signal[k];
    }

    State next;
    next.formulation = Formulation::transformed;
    next.t = s.t + dt;
    next.u = diffuse(ustar, dt, opts, report);
    next.signal = diffuse(wstar, dt, opts, report);
    check_density(next.u, opts, next.t);
    if (!next.signal.all_finite()) throw NumericalError("w became non-finite near t = " + std::to_string(next.t));
    return {std::move(next), report};
}

std::pair<State, StepReport> step_original(const State& s, const Params& p, double dt, const StepOptions& opts,
                                           const SourceTerms* src) {
    require_formulation(s, Formulation::original, "step_original");
    if (!(dt > 0.0)) throw ValidationError("step_original: dt must be positive");
    if (!(s.signal.min() > opts.v_floor)) throw PositivityError("step_original: v must stay above v_floor");
    StepReport report;
    report.dt_used = dt;
    const Grid& g = s.u.grid();

    const ScalarField ustar = advance_density_explicit(s, p, dt, opts, src, report);

    const ScalarField& v = s.signal;
    ScalarField vstar(g);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double rate = f_eval(std::max(s.u[k], 0.0), p);
        vstar[k] = opts.v_decay == DecayMode::exponential ? v[k] * std::exp(-rate * dt) : v[k] * (1.0 - dt * rate);
    }
    if (opts.explicit_only) {
        const ScalarField lap = laplacian(v);
        for (std::size_t k = 0; k < v.size(); ++k) vstar[k] += dt * lap[k];
    }
    if (src) {
        for (std::size_t k = 0; k < v.size(); ++k) vstar[k] += dt * src->signal[k];
    }

    State next;
    next.formulation = Formulation::original;
    next.t = s.t + dt;
    next.u = diffuse(ustar, dt, opts, report);
    next.signal = diffuse(vstar, dt, opts, report);
    check_density(next.u, opts, next.t);
    if (!next.signal.all_finite() || !(next.signal.min() > opts.v_floor)) {
        std::ostringstream msg;
        msg << "signal positivity lost: min v = " << next.signal.min() << " at t = " << next.t
            << " (dt too large?)";
        throw PositivityError(msg.str());
    }
    return {std::move(next), report};
}

std::pair<State, StepReport> step(const State& s, const Params& p, double dt, const StepOptions& opts,
                                  const SourceTerms* src) {
    return s.formulation == Formulation::transformed ? step_transformed(s, p, dt, opts, src)
                                                     : step_original(s, p, dt, opts, src);
}

double adaptive_dt(const State& s, const Params& p, const StepOptions& opts) {
    const double speed = std::max(p.chi * max_drift_gradient(s), opts.speed_floor);
    return std::min(opts.dt_max, opts.safety * s.u.grid().h_min() / speed);
}

}  // namespace chemolab
