#include "chemolab/linear_solver.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "chemolab/errors.hpp"

namespace chemolab {

void apply_helmholtz(const Grid& g, std::span<const double> x, std::span<double> y, double dt) {
    const int nx = g.nx;
    const int ny = g.ny;
    const double cx = dt / (g.hx * g.hx);
    const double cy = dt / (g.hy * g.hy);
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * nx;
        const double* xc = x.data() + row;
        const double* xs = j > 0 ? xc - nx : nullptr;
        const double* xn = j + 1 < ny ? xc + nx : nullptr;
        double* yc = y.data() + row;
        for (int i = 0; i < nx; ++i) {
            const double c = xc[i];
            double lap = 0.0;
            if (i > 0) lap += cx * (xc[i - 1] - c);
            if (i + 1 < nx) lap += cx * (xc[i + 1] - c);
            if (xs) lap += cy * (xs[i] - c);
            if (xn) lap += cy * (xn[i] - c);
            yc[i] = c - lap;
        }
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

}  // namespace

CgResult solve_implicit_diffusion(const ScalarField& b, double dt, ScalarField& x, const CgOptions& opts) {
    const Grid& g = b.grid();
    const std::size_t n = g.cells();
    x = b;
    std::vector<double> r(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);

    auto xs = x.values();
    auto bs = b.values();
    apply_helmholtz(g, xs, ap, dt);
    for (std::size_t k = 0; k < n; ++k) r[k] = bs[k] - ap[k];

    double rr = dot(r, r);
    const double stop = std::max(opts.rtol * std::sqrt(rr), opts.atol_rel * std::sqrt(dot(bs, bs)));
    CgResult result;
    if (std::sqrt(rr) > stop) {
        p = r;
        while (true) {
            if (result.iterations >= opts.max_iterations) {
                throw SolverDivergence("implicit diffusion solve exceeded " + std::to_string(opts.max_iterations) +
                                       " CG iterations");
            }
            apply_helmholtz(g, p, ap, dt);
            const double alpha = rr / dot(p, ap);
            for (std::size_t k = 0; k < n; ++k) {
                xs[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            ++result.iterations;
            const double rr_next = dot(r, r);
            if (!std::isfinite(rr_next)) throw SolverDivergence("implicit diffusion solve produced non-finite residual");
            if (std::sqrt(rr_next) <= stop) {
                rr = rr_next;
                break;
            }
            const double beta = rr_next / rr;
            rr = rr_next;
            for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
        }
    }

    // mean projection of the true residual
    apply_helmholtz(g, xs, ap, dt);
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += bs[k] - ap[k];
    mean /= static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) xs[k] += mean;
    result.residual_norm = std::sqrt(rr);
    return result;
}

}  // namespace chemolab
