#include "chemolab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "chemolab/errors.hpp"

namespace chemolab {

double fisher(const ScalarField& u, double eps_u) {
    const ScalarField gsq = cell_grad_sq(u);
    CompensatedSum sum;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double denom = std::max(u[k], 0.0) + eps_u;
        if (gsq[k] == 0.0) continue;
        sum += denom > 0.0 ? gsq[k] / denom : std::numeric_limits<double>::infinity();
    }
    return sum.value() * u.grid().cell_area();
}

double fisher(const State& s, double eps_u) { return fisher(s.u, eps_u); }

DiagnosticsRecord record(const State& s, const Params& p, double a, double eps_u) {
    const ScalarField& u = s.u;
    const Grid& g = u.grid();
    const double ca = g.cell_area();
    const ScalarField w = signal_as_w(s, p);
    const ScalarField gsq = cell_grad_sq(w);

    DiagnosticsRecord r;
    r.t = s.t;
    CompensatedSum mass, entropy, uw, u2, h, l2, l4, l6;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double uk = u[k];
        const double up = std::max(uk, 0.0);
        mass += uk;
        if (up > 0.0) entropy += up * std::log(up);
        uw += uk * w[k];
        u2 += uk * uk;
        h += H_eval(up, p);
        const double s2 = gsq[k];
        l2 += s2;
        l4 += s2 * s2;
        l6 += s2 * s2 * s2;
    }
    r.mass = mass.value() * ca;
    r.entropy = entropy.value() * ca;
    r.fisher = fisher(u, eps_u);
    r.F = r.entropy + a * uw.value() * ca;
    r.gradw_l2 = l2.value() * ca;
    r.gradw_l4 = l4.value() * ca;
    r.gradw_l6 = l6.value() * ca;
    r.u_l2 = u2.value() * ca;
    r.int_H = h.value() * ca;
    r.G = 0.5 * r.gradw_l2 + r.int_H;
    r.sup_u = u.max();
    r.sup_w = w.max();
    r.min_v = s.formulation == Formulation::original ? s.signal.min() : p.v0_max * std::exp(-r.sup_w);
    return r;
}

AuditSample audit_sample(const State& s, const Params& p) {
    const ScalarField& u = s.u;
    const double ca = u.grid().cell_area();
    const ScalarField w = signal_as_w(s, p);
    const ScalarField gsq_w = cell_grad_sq(w);
    const ScalarField gsq_u = cell_grad_sq(u);
    const ScalarField lap_w = laplacian(w);
    const ScalarField gsq_gsq_w = cell_grad_sq(gsq_w);

    AuditSample a;
    a.t = s.t;
    CompensatedSum u2, u3, gu, ff, lw, ggw, h, l2, l4, l6;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double up = std::max(u[k], 0.0);
        u2 += up * up;
        u3 += up * up * up;
        gu += gsq_u[k];
        if (gsq_u[k] > 0.0) {
            ff += fprime_eval(up, p).value * gsq_u[k] / std::max(up, p.fprime_s_min);
        }
        lw += lap_w[k] * lap_w[k];
        ggw += gsq_gsq_w[k];
        h += H_eval(up, p);
        const double s2 = gsq_w[k];
        l2 += s2;
        l4 += s2 * s2;
        l6 += s2 * s2 * s2;
    }
    a.u_l2 = u2.value() * ca;
    a.u_l3 = u3.value() * ca;
    a.grad_u_l2 = gu.value() * ca;
    a.fprime_fisher = ff.value() * ca;
    a.lap_w_l2 = lw.value() * ca;
    a.grad_gradw2_l2 = ggw.value() * ca;
    a.gradw_l2 = l2.value() * ca;
    a.gradw_l4 = l4.value() * ca;
    a.gradw_l6 = l6.value() * ca;
    a.G = 0.5 * a.gradw_l2 + h.value() * ca;
    return a;
}

bool smallness_check(double g_at_t0, double m, const Params& p, double cgn) {
    const double M = 0.5 * 9.0 / (17.0 * 32.0 * cgn);
    return g_at_t0 < threshold_boundedness(m, p, cgn, M).g_threshold;
}

MonotonicityReport check_G_monotone(std::span<const DiagnosticsRecord> records, double t0, double slack) {
    MonotonicityReport rep;
    rep.max_increment = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        if (records[k].t < t0) continue;
        const double inc = records[k + 1].G - records[k].G;
        ++rep.intervals_checked;
        if (inc > rep.max_increment) {
            rep.max_increment = inc;
            rep.interval_start = records[k].t;
            rep.interval_end = records[k + 1].t;
        }
    }
    if (rep.intervals_checked == 0) rep.max_increment = 0.0;
    rep.passed = rep.max_increment <= slack;
    return rep;
}

TimeAverage time_average_gradw(std::span<const DiagnosticsRecord> records, double t) {
    if (!(t > 0.0)) throw ValidationError("time_average_gradw: t must be positive");
    const double lo = 0.5 * t;
    const double tol = 1e-12 * t;
    if (records.empty() || records.front().t > lo + tol || records.back().t < t - tol) {
        throw ValidationError("time_average_gradw: records do not cover [t/2, t]");
    }
    std::vector<const DiagnosticsRecord*> window;
    for (const auto& r : records) {
        if (r.t >= lo - tol && r.t <= t + tol) window.push_back(&r);
    }
    if (window.size() < 2) throw ValidationError("time_average_gradw: need at least two records in [t/2, t]");

    TimeAverage out;
    out.value_at_t_star = std::numeric_limits<double>::infinity();
    double integral = 0.0;
    for (std::size_t k = 0; k < window.size(); ++k) {
        if (window[k]->gradw_l2 < out.value_at_t_star) {
            out.value_at_t_star = window[k]->gradw_l2;
            out.t_star = window[k]->t;
        }
        if (k > 0) {
            integral += 0.5 * (window[k]->gradw_l2 + window[k - 1]->gradw_l2) * (window[k]->t - window[k - 1]->t);
        }
    }
    const double span = window.back()->t - window.front()->t;
    out.average = span > 0.0 ? integral / span : window.front()->gradw_l2;
    return out;
}

std::vector<double> time_derivative(std::span<const double> t, std::span<const double> y) {
    const std::size_t n = t.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d.front() = (y[1] - y[0]) / (t[1] - t[0]);
    d.back() = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1]);
    return d;
}

std::vector<AuditRecord> inequality_audit(std::span<const AuditSample> samples, const Params& p, double eps1,
                                          double eps2, double cgn) {
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw ValidationError("inequality_audit: eps1 and eps2 must be positive");
    const std::size_t n = samples.size();
    std::vector<double> t(n), g(n), u2(n), w4(n);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = samples[k].t;
        g[k] = samples[k].G;
        u2[k] = samples[k].u_l2;
        w4[k] = samples[k].gradw_l4;
    }
    const auto dg = time_derivative(t, g);
    const auto du2 = time_derivative(t, u2);
    const auto dw4 = time_derivative(t, w4);

    const double d1 = d1_of(p.chi, eps1);
    const double d2 = d2_of(eps2);
    const double boundary_term = 0.0;
    std::vector<AuditRecord> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const AuditSample& s = samples[k];
        AuditRecord& r = out[k];
        r.t = s.t;
        r.eps1 = eps1;
        r.eps2 = eps2;
        r.D1 = d1;
        r.D2 = d2;
        r.dG_dt = dg[k];
        r.dG_bound_margin =
            -(dg[k] + s.fprime_fisher / p.chi + 0.5 * (1.0 - cgn * s.gradw_l2) * s.lap_w_l2);
        r.du2_dt_margin = eps1 * s.gradw_l6 + d1 * s.u_l3 - (du2[k] + s.grad_u_l2);
        r.dgradw4_dt_margin = (16.0 / 9.0 + 96.0 * eps2) * s.gradw_l6 + 96.0 * d2 * p.beta * s.u_l3 +
                              boundary_term * s.gradw_l2 * s.gradw_l2 +
                              96.0 * d2 * (1.0 - p.beta) * p.domain_area -
                              (dw4[k] + 9.0 / 16.0 * s.grad_gradw2_l2);
        r.combined_margin = r.du2_dt_margin + r.dgradw4_dt_margin;
    }
    return out;
}

namespace {

void append(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += ',';
    out += buf;
}

struct CsvTable {
    std::map<std::string, std::size_t> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("CSV has no header: " + path);
    {
        std::istringstream hs(line);
        std::string name;
        std::size_t idx = 0;
        while (std::getline(hs, name, ',')) table.columns[name] = idx++;
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) {
                throw ValidationError("non-numeric cell on line " + std::to_string(lineno) + " of " + path);
            }
            row.push_back(v);
        }
        if (row.size() != table.columns.size()) {
            throw ValidationError("wrong column count on line " + std::to_string(lineno) + " of " + path);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::size_t column(const CsvTable& t, const std::string& name, const std::string& path) {
    auto it = t.columns.find(name);
    if (it == t.columns.end()) throw ValidationError("CSV " + path + " is missing column '" + name + "'");
    return it->second;
}

}  // namespace

std::string to_csv_row(const DiagnosticsRecord& r) {
    std::string s;
    for (double v : {r.t, r.mass, r.entropy, r.fisher, r.F, r.G, r.gradw_l2, r.gradw_l4, r.gradw_l6, r.u_l2,
                     r.int_H, r.sup_u, r.min_v, r.sup_w}) {
        append(s, v);
    }
    return s;
}

std::string to_csv_row(const AuditRecord& r) {
    std::string s;
    for (double v : {r.t, r.dG_dt, r.dG_bound_margin, r.du2_dt_margin, r.dgradw4_dt_margin, r.combined_margin,
                     r.eps1, r.eps2, r.D1, r.D2}) {
        append(s, v);
    }
    return s;
}

std::string to_csv_row(const AuditSample& r) {
    std::string s;
    for (double v : {r.t, r.G, r.u_l2, r.gradw_l2, r.gradw_l4, r.gradw_l6, r.grad_u_l2, r.u_l3, r.fprime_fisher,
                     r.lap_w_l2, r.grad_gradw2_l2}) {
        append(s, v);
    }
    return s;
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_t = column(t, "t", path), c_mass = column(t, "mass", path),
                      c_ent = column(t, "entropy", path), c_fis = column(t, "fisher", path),
                      c_F = column(t, "F", path), c_G = column(t, "G", path), c_l2 = column(t, "gradw_l2", path),
                      c_l4 = column(t, "gradw_l4", path), c_l6 = column(t, "gradw_l6", path),
                      c_u2 = column(t, "u_l2", path), c_H = column(t, "int_H", path),
                      c_su = column(t, "sup_u", path), c_mv = column(t, "min_v", path),
                      c_sw = column(t, "sup_w", path);
    std::vector<DiagnosticsRecord> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        DiagnosticsRecord r;
        r.t = row[c_t];
        r.mass = row[c_mass];
        r.entropy = row[c_ent];
        r.fisher = row[c_fis];
        r.F = row[c_F];
        r.G = row[c_G];
        r.gradw_l2 = row[c_l2];
        r.gradw_l4 = row[c_l4];
        r.gradw_l6 = row[c_l6];
        r.u_l2 = row[c_u2];
        r.int_H = row[c_H];
        r.sup_u = row[c_su];
        r.min_v = row[c_mv];
        r.sup_w = row[c_sw];
        out.push_back(r);
    }
    return out;
}

std::vector<AuditSample> read_audit_samples_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const char* names[] = {"t",         "G",          "u_l2",          "gradw_l2", "gradw_l4",      "gradw_l6",
                           "grad_u_l2", "u_l3",       "fprime_fisher", "lap_w_l2", "grad_gradw2_l2"};
    std::size_t idx[11];
    for (std::size_t k = 0; k < 11; ++k) idx[k] = column(t, names[k], path);
    std::vector<AuditSample> out;
    for (const auto& row : t.rows) {
        AuditSample a;
        double* fields[] = {&a.t,         &a.G,    &a.u_l2,          &a.gradw_l2, &a.gradw_l4,      &a.gradw_l6,
                            &a.grad_u_l2, &a.u_l3, &a.fprime_fisher, &a.lap_w_l2, &a.grad_gradw2_l2};
        for (std::size_t k = 0; k < 11; ++k) *fields[k] = row[idx[k]];
        out.push_back(a);
    }
    return out;
}

}  // namespace chemolab
