#include "chemolab/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "chemolab/errors.hpp"

namespace chemolab {

namespace {

ScalarField normalized(ScalarField f, double mass) {
    const double total = integrate(f);
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw ValidationError("initial density profile has no positive mass on this grid");
    }
    const double scale = mass / total;
    for (double& x : f.values()) x *= scale;
    return f;
}

}  // namespace

ScalarField initial_density(const Grid& grid, const InitialSpec& spec, std::uint64_t seed) {
    const double s2 = spec.width * spec.width;
    switch (spec.preset) {
        case InitialPreset::uniform:
            return sample(grid, [&](double, double) { return spec.mass / grid.area; });
        case InitialPreset::bump: {
            const double x0 = spec.center_x * grid.lx;
            const double y0 = spec.center_y * grid.ly;
            auto g = sample(grid, [&](double x, double y) {
                return std::exp(-((x - x0) * (x - x0) + (y - y0) * (y - y0)) / s2);
            });
            return normalized(std::move(g), spec.mass);
        }
        case InitialPreset::bumps: {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> pos(0.2, 0.8);
            std::uniform_real_distribution<double> weight(0.5, 1.0);
            ScalarField g(grid);
            for (int b = 0; b < spec.bumps; ++b) {
                const double x0 = pos(rng) * grid.lx;
                const double y0 = pos(rng) * grid.ly;
                const double c = weight(rng);
                for (int j = 0; j < grid.ny; ++j) {
                    for (int i = 0; i < grid.nx; ++i) {
                        const double dx = grid.x(i) - x0;
                        const double dy = grid.y(j) - y0;
                        g(i, j) += c * std::exp(-(dx * dx + dy * dy) / s2);
                    }
                }
            }
            return normalized(std::move(g), spec.mass);
        }
    }
    throw ValidationError("unknown initial preset");
}

ScalarField initial_signal(const Grid& grid, const InitialSpec& spec) {
    if (spec.v0_profile == V0Profile::constant) {
        return sample(grid, [&](double, double) { return spec.v0_max; });
    }
    const double pi = std::numbers::pi;
    return sample(grid, [&](double x, double y) {
        const double shape = std::cos(pi * x / grid.lx) * std::cos(pi * y / grid.ly);
        return spec.v0_max * std::exp(-spec.v0_amplitude * (1.0 - shape) / 2.0);
    });
}

InitialCondition make_initial_condition(const ExperimentConfig& cfg) {
    const Grid grid = grid_of(cfg);
    ScalarField u = initial_density(grid, cfg.initial, cfg.seed);
    ScalarField v = initial_signal(grid, cfg.initial);
    Params p = params_of(cfg, v.max());
    State s{std::move(u), ScalarField(grid), 0.0, cfg.formulation};
    s.signal = cfg.formulation == Formulation::original ? std::move(v) : v_to_w(v, p);
    return {std::move(s), std::move(p)};
}

}  // namespace chemolab
