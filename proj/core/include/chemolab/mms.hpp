#pragma once

#include <span>
#include <vector>

#include "chemolab/solver.hpp"

namespace chemolab {

/// diffusion:   u_t = Lap u + S on its own (backward Euler, implicit solve only).
/// transformed: full (u, w) system with forcing.
/// original:    full (u, v) system with forcing, v* = exp(-w*).
enum class MmsCase { diffusion, transformed, original };

struct MmsOptions {
    int start_n = 16;
    double t_end = 0.05;
    /// dt = dt_factor * h^2, rounded down so that t_end is hit exactly.
    double dt_factor = 0.25;
    double chi = 0.5;
    double beta = 0.5;
    double lx = 1.0;
    double ly = 1.0;
};

struct MmsLevel {
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    int steps = 0;
    /// Max-norm error over u and the signal at t_end.
    double error = 0.0;
};

/// Manufactured solution
///   u* = 1 + cos(pi x/lx) cos(pi y/ly) exp(-t)/2
///   w* = 1/2 + cos(2 pi x/lx) cos(pi y/ly) (1 + t)/4
/// on n = start_n * 2^k square-cell grids, k = 0..levels-1. Throws ValidationError if levels < 3.
std::vector<MmsLevel> mms_convergence(MmsCase which, int levels, const MmsOptions& opts = {});

/// log2(e_k / e_{k+1}) for consecutive levels.
std::vector<double> observed_orders(std::span<const MmsLevel> levels);

struct ConsistencyOptions {
    int start_n = 24;
    double t_end = 0.1;
    double dt0 = 2e-3;
    double chi = 0.5;
    double beta = 0.5;
    double mass = 1.0;
};

struct ConsistencyLevel {
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    /// || v_original - v0_max exp(-w_transformed) ||_inf at t_end.
    double error = 0.0;
};

/// Runs both formulations from identical bump / smooth-v0 data, halving dt and
/// h^2 together at each level (n = round(start_n 2^(k/2))).
std::vector<ConsistencyLevel> formulation_consistency(int levels, const ConsistencyOptions& opts = {});

}  // namespace chemolab
