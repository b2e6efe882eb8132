#pragma once

#include "chemolab/grid.hpp"

namespace chemolab {

struct CgOptions {
    /// Stop once ||r_k|| <= max(rtol * ||r_0||, atol_rel * ||b||) in the 2-norm.
    double rtol = 1e-12;
    double atol_rel = 1e-15;
    int max_iterations = 20000;
};

struct CgResult {
    int iterations = 0;
    double residual_norm = 0.0;
};

/// y = x - dt * laplacian(x), the backward-Euler diffusion operator.
void apply_helmholtz(const Grid& grid, std::span<const double> x, std::span<double> y, double dt);

/// Solves (I - dt*Lap) x = b by conjugate gradients, warm-started from x = b.
/// The final residual has its mean removed (the operator maps constants to
/// themselves), so sum(x) == sum(b) up to round-off whatever the tolerance.
/// Throws SolverDivergence if the iteration cap is hit.
CgResult solve_implicit_diffusion(const ScalarField& b, double dt, ScalarField& x, const CgOptions& opts = {});

}  // namespace chemolab
