#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace chemolab {

/// Neumaier compensated summation.
class CompensatedSum {
public:
    CompensatedSum& operator+=(double x) {
        const double t = sum_ + x;
        if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }
    // an infinite or NaN term poisons the carry; the plain sum is then the answer
    [[nodiscard]] double value() const { return std::isfinite(sum_) ? sum_ + carry_ : sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Uniform cell-centered mesh on [0,lx]x[0,ly]. Cell (i,j) has center
/// ((i+1/2)hx, (j+1/2)hy) and lives at index j*nx + i.
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    double hx = 0.0;
    double hy = 0.0;
    double area = 0.0;

    [[nodiscard]] std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
    [[nodiscard]] std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * nx + i;
    }
    [[nodiscard]] double cell_area() const { return hx * hy; }
    [[nodiscard]] double x(int i) const { return (i + 0.5) * hx; }
    [[nodiscard]] double y(int j) const { return (j + 0.5) * hy; }
    [[nodiscard]] double h_min() const { return hx < hy ? hx : hy; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws ValidationError unless nx, ny >= 3 and lx, ly > 0.
Grid build_grid(int nx, int ny, double lx, double ly);

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& grid, double value = 0.0);
    ScalarField(const Grid& grid, std::vector<double> values);

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    Grid grid_{};
    std::vector<double> values_;
};

/// Fills a field by evaluating fn(x, y) at cell centers.
template <class Fn>
ScalarField sample(const Grid& grid, Fn&& fn) {
    ScalarField f(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) f(i, j) = fn(grid.x(i), grid.y(j));
    }
    return f;
}

/// Face-normal values. x-faces are (nx+1) x ny, face (i,j) sits at x = i*hx;
/// y-faces are nx x (ny+1), face (i,j) sits at y = j*hy. Faces on the domain
/// boundary are held at exactly zero.
struct FluxField {
    Grid grid{};
    std::vector<double> x_faces;
    std::vector<double> y_faces;

    explicit FluxField(const Grid& g)
        : grid(g),
          x_faces(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0),
          y_faces(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0) {}

    double& x(int i, int j) { return x_faces[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double x(int i, int j) const { return x_faces[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double& y(int i, int j) { return y_faces[static_cast<std::size_t>(j) * grid.nx + i]; }
    double y(int i, int j) const { return y_faces[static_cast<std::size_t>(j) * grid.nx + i]; }
};

enum class FaceScheme { central, upwind };

// Discrete operators. All treat the boundary as zero-flux (mirror ghosts).

ScalarField laplacian(const ScalarField& f);

/// Two-point difference per interior face; boundary faces zero.
FluxField face_gradient(const ScalarField& f);

/// chi * div(u grad w) in conservative flux form. The face value of u is the
/// arithmetic mean (central) or the donor cell along the drift -chi grad w (upwind).
ScalarField div_chemotaxis_flux(const ScalarField& u, const ScalarField& w, double chi,
                                FaceScheme scheme = FaceScheme::central);

/// Midpoint quadrature: sum f_k * hx * hy.
double integrate(const ScalarField& f);
double integrate(const Grid& grid, std::span<const double> values);

/// |grad f|^2 per cell: for each axis, the mean of squared differences over the
/// cell's interior faces (boundary faces carry no information and are skipped).
ScalarField cell_grad_sq(const ScalarField& f);

/// Integral of |grad f|^p using cell_grad_sq. Throws ValidationError if p < 1.
double grad_lp_norm(const ScalarField& f, double p);

/// Pointwise helpers.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

}  // namespace chemolab
