#include "chemolab/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "chemolab/errors.hpp"

namespace chemolab {

namespace {

// 8-point Gauss-Legendre on [-1,1]
constexpr std::array<double, 8> kGlNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

}  // namespace

TabulatedConsumption::TabulatedConsumption(std::vector<double> s, std::vector<double> f, double beta)
    : s_(std::move(s)), f_(std::move(f)) {
    if (s_.size() != f_.size() || s_.empty()) throw ValidationError("f table: s and f columns differ in length");
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("f table: beta must lie in (0,1)");
    if (s_.front() < 0.0) throw ValidationError("f table: s must be nonnegative");
    if (s_.front() == 0.0) {
        if (f_.front() != 0.0) throw ValidationError("f table: f(0) must be 0");
    } else {
        s_.insert(s_.begin(), 0.0);
        f_.insert(f_.begin(), 0.0);
    }
    if (s_.size() < 2) throw ValidationError("f table: need at least one positive knot");
    for (std::size_t k = 1; k < s_.size(); ++k) {
        if (!(s_[k] > s_[k - 1])) throw ValidationError("f table: s must be strictly increasing");
    }

    const std::size_t n = s_.size();
    std::vector<double> h(n - 1);
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = s_[k + 1] - s_[k];
        delta[k] = (f_[k + 1] - f_[k]) / h[k];
    }
    d_.assign(n, 0.0);
    d_.front() = delta.front();
    d_.back() = delta.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) {
            d_[k] = 0.0;
        } else {
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }

    constexpr double rel = 1e-12;
    constexpr int kSamples = 32;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        for (int q = 0; q <= kSamples; ++q) {
            const double sv = s_[k] + h[k] * q / kSamples;
            if (sv <= 0.0) continue;
            const double fv = value(sv);
            const double dv = derivative(sv);
            const double cap = std::pow(sv, beta);
            const double dcap = beta * std::pow(sv, beta - 1.0);
            if (fv < 0.0 || fv > cap * (1.0 + rel)) {
                throw ValidationError("f table violates 0 <= f(s) <= s^beta at s = " + num(sv));
            }
            if (dv < -rel * dcap || dv > dcap * (1.0 + rel)) {
                throw ValidationError("f table violates 0 <= f'(s) <= beta s^(beta-1) at s = " + num(sv));
            }
        }
    }
}

TabulatedConsumption TabulatedConsumption::load_csv(const std::filesystem::path& path, double beta) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open f table: " + path.string());
    std::vector<double> s;
    std::vector<double> f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a = 0.0;
        double b = 0.0;
        if (!(ls >> a >> b)) {
            if (s.empty() && lineno == 1) continue;  // header
            throw ValidationError("f table: malformed line " + std::to_string(lineno) + " in " + path.string());
        }
        s.push_back(a);
        f.push_back(b);
    }
    return TabulatedConsumption(std::move(s), std::move(f), beta);
}

std::size_t TabulatedConsumption::segment(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - s_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, s_.size() - 2);
}

double TabulatedConsumption::value(double s) const {
    if (s >= s_.back()) return f_.back();
    const std::size_t k = segment(s);
    const double h = s_[k + 1] - s_[k];
    const double t = (s - s_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f_[k] + (t3 - 2 * t2 + t) * h * d_[k] + (-2 * t3 + 3 * t2) * f_[k + 1] +
           (t3 - t2) * h * d_[k + 1];
}

double TabulatedConsumption::derivative(double s) const {
    if (s >= s_.back()) return 0.0;
    const std::size_t k = segment(s);
    const double h = s_[k + 1] - s_[k];
    const double t = (s - s_[k]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * f_[k] + (-6 * t2 + 6 * t) * f_[k + 1]) / h + (3 * t2 - 4 * t + 1) * d_[k] +
           (3 * t2 - 2 * t) * d_[k + 1];
}

double TabulatedConsumption::tail_integral(double xi) const {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < s_.size(); ++k) {
        const double a = std::max(s_[k], xi);
        const double b = s_[k + 1];
        if (b <= a) continue;
        // geometric substitution sigma = a (b/a)^tau resolves the 1/sigma weight
        const double ratio = std::log(b / a);
        double seg = 0.0;
        for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
            const double tau = 0.5 * (kGlNodes[q] + 1.0);
            const double sigma = a * std::exp(tau * ratio);
            seg += kGlWeights[q] * derivative(sigma);
        }
        total += 0.5 * seg * ratio;
    }
    return total;
}

void validate(const Params& p) {
    if (!(p.chi > 0.0 && p.chi < 1.0)) throw ValidationError("chi must lie in (0,1), got " + num(p.chi));
    if (!(p.beta > 0.0 && p.beta < 1.0)) throw ValidationError("beta must lie in (0,1), got " + num(p.beta));
    if (!(p.v0_max > 0.0) || !std::isfinite(p.v0_max)) {
        throw ValidationError("v0_max must be positive, got " + num(p.v0_max));
    }
    if (!(p.domain_area > 0.0)) throw ValidationError("domain_area must be positive, got " + num(p.domain_area));
    if (p.f_kind == ConsumptionKind::tabulated && !p.f_table) {
        throw ValidationError("tabulated consumption selected without a table");
    }
}

double f_eval(double s, const Params& p) {
    if (s < 0.0) throw ValidationError("f_eval: s must be nonnegative, got " + num(s));
    if (p.f_kind == ConsumptionKind::tabulated) return p.f_table->value(s);
    return s == 0.0 ? 0.0 : std::pow(s, p.beta);
}

FPrime fprime_eval(double s, const Params& p) {
    if (s < 0.0) throw ValidationError("fprime_eval: s must be nonnegative, got " + num(s));
    if (p.f_kind == ConsumptionKind::tabulated) return {p.f_table->derivative(s), false};
    if (s < p.fprime_s_min) return {p.beta * std::pow(p.fprime_s_min, p.beta - 1.0), true};
    return {p.beta * std::pow(s, p.beta - 1.0), false};
}

double H_eval(double xi, const Params& p) {
    if (!(p.beta < 1.0)) throw ValidationError("H_eval requires beta < 1");
    if (xi < 0.0) throw ValidationError("H_eval: xi must be nonnegative, got " + num(xi));
    if (xi == 0.0) return 0.0;
    if (p.f_kind == ConsumptionKind::tabulated) {
        // swapping the order of integration: int_0^xi int_s^inf = f(xi) + xi int_xi^inf f'/sigma
        return -(p.f_table->value(xi) + xi * p.f_table->tail_integral(xi)) / p.chi;
    }
    return -std::pow(xi, p.beta) / (p.chi * (1.0 - p.beta));
}

ScalarField v_to_w(const ScalarField& v, const Params& p) {
    ScalarField w(v.grid());
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!(v[k] > 0.0)) {
            throw PositivityError("v_to_w: signal must be strictly positive, found v = " + num(v[k]));
        }
        w[k] = -std::log(v[k] / p.v0_max);
    }
    return w;
}

ScalarField w_to_v(const ScalarField& w, const Params& p) {
    ScalarField v(w.grid());
    for (std::size_t k = 0; k < w.size(); ++k) v[k] = p.v0_max * std::exp(-w[k]);
    return v;
}

AWindow a_window(double chi) {
    if (!(chi > 0.0 && chi < 1.0)) throw ValidationError("chi must lie in (0,1), got " + num(chi));
    const double root = std::sqrt(1.0 - chi * chi);
    AWindow w;
    w.plus = 0.5 + 0.5 * root;
    // same root as 1/2 - sqrt(1-chi^2)/2, written without cancellation
    w.minus = chi * chi / (2.0 * (1.0 + root));
    return w;
}

double c0_of(double chi, double a) {
    if (!(chi > 0.0 && chi < 1.0)) throw ValidationError("chi must lie in (0,1), got " + num(chi));
    if (!(a > 0.0)) throw ValidationError("a must be positive, got " + num(a));
    const double s = chi + 2.0 * a;
    return 1.0 - s * s / (4.0 * a * (chi + 1.0));
}

double d1_of(double chi, double eps1) { return chi * chi * chi / 3.0 / std::sqrt(6.0 * eps1); }

double d2_of(double eps2) { return 2.0 / 3.0 / std::sqrt(3.0 * eps2); }

ThresholdReport threshold_boundedness(double m, const Params& p, double cgn, double M, double a) {
    validate(p);
    if (!(m > 0.0)) throw ValidationError("mass must be positive, got " + num(m));
    if (!(cgn > 0.0)) throw ValidationError("cgn must be positive, got " + num(cgn));
    if (!(M > 0.0)) throw ValidationError("M must be positive, got " + num(M));

    ThresholdReport r;
    const AWindow win = a_window(p.chi);
    r.a_minus = win.minus;
    r.a_plus = win.plus;
    r.a = a;
    r.c0 = c0_of(p.chi, a);
    r.cgn_used = cgn;
    r.M = M;

    const double area = p.domain_area;
    const double scale = p.chi * (1.0 - p.beta);
    const double area_pow = std::pow(area, 1.0 - p.beta);
    r.g_threshold = 1.0 / (4.0 * cgn) - std::pow(m, p.beta) * area_pow / scale;
    r.M_window_upper = 9.0 / (17.0 * 32.0 * cgn);

    r.eps2 = 1.0 / (96.0 * 9.0);
    r.eps1 = 1.0 / (32.0 * M * cgn) - 17.0 / 9.0;
    const double first = std::pow(scale / (4.0 * area_pow * cgn), 1.0 / p.beta);
    const double second = std::pow(M * scale / (4.0 * area_pow), 1.0 / p.beta);
    if (r.eps1 > 0.0) {
        r.gamma = d1_of(p.chi, r.eps1) + 96.0 * p.beta * d2_of(r.eps2);
        r.m_bar = 1.0 / (16.0 * r.gamma * cgn * cgn * cgn);
        r.m_star_bound = std::min({first, second, r.m_bar});
    } else {
        r.gamma = std::numeric_limits<double>::quiet_NaN();
        r.m_bar = std::numeric_limits<double>::quiet_NaN();
        r.m_star_bound = 0.0;
    }
    return r;
}

}  // namespace chemolab
