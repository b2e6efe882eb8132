#pragma once

#include <filesystem>
#include <memory>
#include <utility>
#include <vector>

#include "chemolab/grid.hpp"

namespace chemolab {

/// Consumption rate given as a table (s_k, f_k), interpolated by a monotone
/// piecewise cubic Hermite (Fritsch-Carlson slopes). Held constant past the
/// last knot. A knot (0,0) is prepended when the table starts above s = 0.
class TabulatedConsumption {
public:
    /// Validates the envelopes 0 <= f(s) <= s^beta and 0 <= f'(s) <= beta s^(beta-1)
    /// at every knot and on a dense sample inside each interval.
    TabulatedConsumption(std::vector<double> s, std::vector<double> f, double beta);

    /// Two-column CSV (s, f(s)), optional header line, strictly increasing s.
    static TabulatedConsumption load_csv(const std::filesystem::path& path, double beta);

    [[nodiscard]] double value(double s) const;
    [[nodiscard]] double derivative(double s) const;
    /// integral of f'(sigma)/sigma over [xi, s_last]; xi > 0.
    [[nodiscard]] double tail_integral(double xi) const;

    [[nodiscard]] const std::vector<double>& knots() const { return s_; }
    [[nodiscard]] const std::vector<double>& knot_values() const { return f_; }

private:
    [[nodiscard]] std::size_t segment(double s) const;

    std::vector<double> s_;
    std::vector<double> f_;
    std::vector<double> d_;
};

enum class ConsumptionKind { power, tabulated };

struct Params {
    double chi = 0.5;
    double beta = 0.5;
    ConsumptionKind f_kind = ConsumptionKind::power;
    std::shared_ptr<const TabulatedConsumption> f_table;
    double v0_max = 1.0;
    double domain_area = 1.0;
    /// f' is evaluated at max(s, fprime_s_min) to keep audits finite near s = 0.
    double fprime_s_min = 1e-12;
};

/// Throws ValidationError naming the offending field.
void validate(const Params& p);

/// f(s); throws ValidationError for s < 0.
double f_eval(double s, const Params& p);

struct FPrime {
    double value = 0.0;
    bool clamped = false;
};

/// f'(s) with the small-s clamp; throws ValidationError for s < 0.
FPrime fprime_eval(double s, const Params& p);

/// H(xi) = -(1/chi) int_0^xi int_s^inf f'(sigma)/sigma dsigma ds. For the power
/// law this is -xi^beta / (chi (1-beta)). Throws ValidationError if beta >= 1.
double H_eval(double xi, const Params& p);

/// w = -log(v / v0_max). Throws PositivityError if any v <= 0.
ScalarField v_to_w(const ScalarField& v, const Params& p);
/// v = v0_max * exp(-w).
ScalarField w_to_v(const ScalarField& w, const Params& p);

struct AWindow {
    double minus = 0.0;
    double plus = 0.0;
};

/// Roots of 4a^2 - 4a + chi^2; throws ValidationError unless 0 < chi < 1.
AWindow a_window(double chi);

/// c0 = 1 - (chi + 2a)^2 / (4a(chi + 1)); positive iff a lies strictly inside a_window(chi).
double c0_of(double chi, double a);

/// Young-inequality constants: D1 = chi^3/3 (6 eps1)^(-1/2), D2 = 2/3 (3 eps2)^(-1/2).
double d1_of(double chi, double eps1);
double d2_of(double eps2);

struct ThresholdReport {
    double a_minus = 0.0;
    double a_plus = 0.0;
    double a = 0.5;
    double c0 = 0.0;
    double g_threshold = 0.0;
    double M = 0.0;
    double M_window_upper = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double gamma = 0.0;
    double m_bar = 0.0;
    double m_star_bound = 0.0;
    double cgn_used = 0.0;
};

/// Closed-form smallness thresholds for mass m, working GN constant cgn and
/// eventual gradient bound M. When M lies outside (0, M_window_upper) the
/// eps1 choice is not admissible: m_bar is NaN and m_star_bound is 0.
ThresholdReport threshold_boundedness(double m, const Params& p, double cgn, double M, double a = 0.5);

}  // namespace chemolab
