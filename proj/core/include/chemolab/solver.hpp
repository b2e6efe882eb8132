#pragma once

#include <utility>

#include "chemolab/grid.hpp"
#include "chemolab/linear_solver.hpp"
#include "chemolab/model.hpp"

namespace chemolab {

enum class Formulation { original, transformed };

/// How the explicit chemotaxis update keeps u >= 0.
///  limiter: each cell's outgoing face fluxes are scaled down just enough that
///           it cannot export more than it holds (mass-exact, no clipping).
///  clip:    unlimited fluxes, negative cells reset to 0 and the added mass is reported.
///  none:    unlimited fluxes; any u below -u_negative_tol is a PositivityError.
enum class PositivityMode { limiter, clip, none };

/// v-decay treatment in the original formulation.
enum class DecayMode { exponential, explicit_euler };

struct StepOptions {
    FaceScheme face_scheme = FaceScheme::central;
    PositivityMode positivity = PositivityMode::limiter;
    DecayMode v_decay = DecayMode::exponential;
    /// Replace the implicit diffusion solves by forward Euler (verification only).
    bool explicit_only = false;
    double safety = 0.4;
    double dt_max = 1e-2;
    /// Lower bound on the drift speed in adaptive_dt.
    double speed_floor = 1e-12;
    double v_floor = 1e-300;
    double u_negative_tol = 1e-13;
    CgOptions cg{};
};

/// Evolving unknowns. `signal` holds w for the transformed formulation and v
/// for the original one.
struct State {
    ScalarField u;
    ScalarField signal;
    double t = 0.0;
    Formulation formulation = Formulation::transformed;
};

struct StepReport {
    double dt_used = 0.0;
    double positivity_clip_mass = 0.0;
    double max_cfl = 0.0;
    int limited_cells = 0;
    int cg_iterations = 0;
};

/// Optional manufactured forcing, added explicitly as dt * S.
struct SourceTerms {
    ScalarField u;
    ScalarField signal;
};

/// w view of a state regardless of formulation.
ScalarField signal_as_w(const State& s, const Params& p);
/// v view of a state regardless of formulation.
ScalarField signal_as_v(const State& s, const Params& p);

/// Cell-wise product-form estimate of |grad w|^2: per axis (D+w)(D-w), with the
/// one-sided difference across the boundary taken as zero. Second order, and
/// nonpositive at a discrete minimum of w.
ScalarField grad_sq_product(const ScalarField& w);

/// Largest face drift gradient |grad w| (|grad v|/v for the original formulation).
double max_drift_gradient(const State& s);

/// One IMEX step of u_t = Lap u + chi div(u grad w), w_t = Lap w - |grad w|^2 + f(u).
std::pair<State, StepReport> step_transformed(const State& s, const Params& p, double dt,
                                              const StepOptions& opts = {}, const SourceTerms* src = nullptr);

/// One IMEX step of u_t = Lap u - chi div(u grad v / v), v_t = Lap v - f(u) v.
std::pair<State, StepReport> step_original(const State& s, const Params& p, double dt,
                                           const StepOptions& opts = {}, const SourceTerms* src = nullptr);

std::pair<State, StepReport> step(const State& s, const Params& p, double dt, const StepOptions& opts = {},
                                  const SourceTerms* src = nullptr);

/// dt = min(dt_max, safety * min(hx,hy) / max(chi * max|grad w|, speed_floor)).
double adaptive_dt(const State& s, const Params& p, const StepOptions& opts = {});

}  // namespace chemolab
