#include "chemolab/gn_probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "chemolab/errors.hpp"

namespace chemolab {

GnMode parse_gn_mode(std::string_view name) {
    if (name == "ineq_4_2_2") return GnMode::ineq_4_2_2;
    if (name == "ineq_L3") return GnMode::ineq_L3;
    if (name == "ladyzhenskaya") return GnMode::ladyzhenskaya;
    throw ValidationError("unknown GN mode '" + std::string(name) + "' (ineq_4_2_2, ineq_L3, ladyzhenskaya)");
}

std::string_view to_string(GnMode mode) {
    switch (mode) {
        case GnMode::ineq_4_2_2: return "ineq_4_2_2";
        case GnMode::ineq_L3: return "ineq_L3";
        case GnMode::ladyzhenskaya: return "ladyzhenskaya";
    }
    return "?";
}

std::optional<double> gn_ratio(const ScalarField& f, GnMode mode) {
    const double ca = f.grid().cell_area();
    const ScalarField gsq = cell_grad_sq(f);
    double grad2 = 0.0;
    for (double s : gsq.values()) grad2 += s;
    grad2 *= ca;

    switch (mode) {
        case GnMode::ineq_4_2_2: {
            double l2 = 0.0, l4 = 0.0;
            for (double v : f.values()) {
                l2 += v * v;
                l4 += v * v * v * v;
            }
            const double n2 = std::sqrt(l2 * ca);
            if (n2 == 0.0) return std::nullopt;
            const double n4 = std::pow(l4 * ca, 0.25);
            return n4 / (std::sqrt(std::sqrt(grad2) * n2) + n2);
        }
        case GnMode::ineq_L3: {
            double l1 = 0.0, l2 = 0.0, l3 = 0.0;
            for (double v : f.values()) {
                const double a = std::abs(v);
                l1 += a;
                l2 += a * a;
                l3 += a * a * a;
            }
            if (l1 == 0.0) return std::nullopt;
            const double n1 = l1 * ca;
            const double w12 = std::sqrt(l2 * ca + grad2);
            return std::cbrt(l3 * ca) / (std::cbrt(n1) * std::pow(w12, 2.0 / 3.0));
        }
        case GnMode::ladyzhenskaya: {
            // a constant field has round-off gradients only
            if (grad2 <= 1e-24 * std::max(1.0, f.max_abs() * f.max_abs()) * f.grid().area) return std::nullopt;
            const ScalarField lap = laplacian(f);
            double g4 = 0.0, l2 = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) {
                g4 += gsq[k] * gsq[k];
                l2 += lap[k] * lap[k];
            }
            g4 *= ca;
            l2 *= ca;
            if (l2 == 0.0) return std::nullopt;
            return g4 / (grad2 * l2);
        }
    }
    return std::nullopt;
}

ScalarField random_cosine_field(const Grid& grid, std::mt19937_64& rng, int max_mode) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const int modes = max_mode + 1;
    std::vector<double> coeff(static_cast<std::size_t>(modes) * modes);
    for (int l = 0; l < modes; ++l) {
        for (int k = 0; k < modes; ++k) coeff[l * modes + k] = normal(rng) / (1.0 + k * k + l * l);
    }
    // separable tables of cos(k pi x_i / lx) and cos(l pi y_j / ly)
    std::vector<double> cx(static_cast<std::size_t>(modes) * grid.nx);
    std::vector<double> cy(static_cast<std::size_t>(modes) * grid.ny);
    for (int k = 0; k < modes; ++k) {
        for (int i = 0; i < grid.nx; ++i) cx[k * grid.nx + i] = std::cos(k * std::numbers::pi * grid.x(i) / grid.lx);
        for (int j = 0; j < grid.ny; ++j) cy[k * grid.ny + j] = std::cos(k * std::numbers::pi * grid.y(j) / grid.ly);
    }
    ScalarField f(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            double v = 0.0;
            for (int l = 0; l < modes; ++l) {
                double row = 0.0;
                for (int k = 0; k < modes; ++k) row += coeff[l * modes + k] * cx[k * grid.nx + i];
                v += row * cy[l * grid.ny + j];
            }
            f(i, j) = v;
        }
    }
    return f;
}

double gn_probe(const Grid& grid, int n_samples, GnMode mode, const GnProbeOptions& opts) {
    if (n_samples < 1) throw ValidationError("gn_probe needs n_samples >= 1");
    double best = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull);
        std::uniform_int_distribution<int> pick(1, std::max(1, opts.max_mode));
        const int modes = pick(rng);
        const ScalarField f = random_cosine_field(grid, rng, modes);
        if (auto r = gn_ratio(f, mode)) best = std::max(best, *r);
    }
    return best;
}

double probe_working_cgn(const Grid& grid, int n_samples, double safety, const GnProbeOptions& opts) {
    double best = 0.0;
    for (GnMode mode : {GnMode::ineq_4_2_2, GnMode::ineq_L3, GnMode::ladyzhenskaya}) {
        best = std::max(best, gn_probe(grid, n_samples, mode, opts));
    }
    return safety * best;
}

}  // namespace chemolab
