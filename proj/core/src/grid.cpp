#include "chemolab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemolab/errors.hpp"

namespace chemolab {

Grid build_grid(int nx, int ny, double lx, double ly) {
    if (nx < 3 || ny < 3) {
        std::ostringstream msg;
        msg << "grid needs at least 3 cells per axis, got nx=" << nx << ", ny=" << ny;
        throw ValidationError(msg.str());
    }
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
        std::ostringstream msg;
        msg << "grid side lengths must be positive and finite, got lx=" << lx << ", ly=" << ly;
        throw ValidationError(msg.str());
    }
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.hx = lx / nx;
    g.hy = ly / ny;
    g.area = lx * ly;
    return g;
}

ScalarField::ScalarField(const Grid& grid, double value) : grid_(grid), values_(grid.cells(), value) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cells()) {
        throw ValidationError("field length does not match grid cell count");
    }
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField laplacian(const ScalarField& f) {
    const Grid& g = f.grid();
    const double cx = 1.0 / (g.hx * g.hx);
    const double cy = 1.0 / (g.hy * g.hy);
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = f(i, j);
            double acc = 0.0;
            if (i + 1 < g.nx) acc += cx * (f(i + 1, j) - c);
            if (i > 0) acc -= cx * (c - f(i - 1, j));
            if (j + 1 < g.ny) acc += cy * (f(i, j + 1) - c);
            if (j > 0) acc -= cy * (c - f(i, j - 1));
            out(i, j) = acc;
        }
    }
    return out;
}

FluxField face_gradient(const ScalarField& f) {
    const Grid& g = f.grid();
    FluxField flux(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) flux.x(i, j) = (f(i, j) - f(i - 1, j)) / g.hx;
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) flux.y(i, j) = (f(i, j) - f(i, j - 1)) / g.hy;
    }
    return flux;
}

namespace {

double face_u(double u_lo, double u_hi, double dw, FaceScheme scheme) {
    if (scheme == FaceScheme::central) return 0.5 * (u_lo + u_hi);
    // drift is -chi*grad w: mass leaves the cell with the larger w
    return dw > 0.0 ? u_hi : u_lo;
}

}  // namespace

ScalarField div_chemotaxis_flux(const ScalarField& u, const ScalarField& w, double chi, FaceScheme scheme) {
    const Grid& g = u.grid();
    FluxField flux(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const double dw = w(i, j) - w(i - 1, j);
            flux.x(i, j) = chi * face_u(u(i - 1, j), u(i, j), dw, scheme) * dw / g.hx;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double dw = w(i, j) - w(i, j - 1);
            flux.y(i, j) = chi * face_u(u(i, j - 1), u(i, j), dw, scheme) * dw / g.hy;
        }
    }
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out(i, j) = (flux.x(i + 1, j) - flux.x(i, j)) / g.hx + (flux.y(i, j + 1) - flux.y(i, j)) / g.hy;
        }
    }
    return out;
}

double integrate(const Grid& grid, std::span<const double> values) {
    CompensatedSum sum;
    for (double v : values) sum += v;
    return sum.value() * grid.cell_area();
}

double integrate(const ScalarField& f) { return integrate(f.grid(), f.values()); }

ScalarField cell_grad_sq(const ScalarField& f) {
    const Grid& g = f.grid();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double sx = 0.0;
            int nxf = 0;
            if (i > 0) {
                const double d = (f(i, j) - f(i - 1, j)) / g.hx;
                sx += d * d;
                ++nxf;
            }
            if (i + 1 < g.nx) {
                const double d = (f(i + 1, j) - f(i, j)) / g.hx;
                sx += d * d;
                ++nxf;
            }
            double sy = 0.0;
            int nyf = 0;
            if (j > 0) {
                const double d = (f(i, j) - f(i, j - 1)) / g.hy;
                sy += d * d;
                ++nyf;
            }
            if (j + 1 < g.ny) {
                const double d = (f(i, j + 1) - f(i, j)) / g.hy;
                sy += d * d;
                ++nyf;
            }
            out(i, j) = sx / nxf + sy / nyf;
        }
    }
    return out;
}

double grad_lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw ValidationError("grad_lp_norm requires p >= 1");
    const ScalarField gsq = cell_grad_sq(f);
    double sum = 0.0;
    if (p == 2.0) {
        for (double s : gsq.values()) sum += s;
    } else {
        for (double s : gsq.values()) sum += std::pow(s, 0.5 * p);
    }
    return sum * f.grid().cell_area();
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
    return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
    return out;
}

ScalarField operator*(double s, const ScalarField& a) {
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = s * a[k];
    return out;
}

}  // namespace chemolab
