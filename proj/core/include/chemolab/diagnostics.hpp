#pragma once

#include <span>
#include <string>
#include <vector>

#include "chemolab/model.hpp"
#include "chemolab/solver.hpp"

namespace chemolab {

/// One time sample of the monitored functionals. Integrals use midpoint quadrature
/// and the interior-face gradient reconstruction of cell_grad_sq.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;      // int u
    double entropy = 0.0;   // int u log u, with 0 log 0 = 0
    double fisher = 0.0;    // int |grad u|^2 / (u + eps_u)
    double F = 0.0;         // entropy + a int u w
    double G = 0.0;         // 1/2 int |grad w|^2 + int H(u)
    double gradw_l2 = 0.0;  // int |grad w|^2
    double gradw_l4 = 0.0;  // int |grad w|^4
    double gradw_l6 = 0.0;  // int |grad w|^6
    double u_l2 = 0.0;      // int u^2
    double int_H = 0.0;     // int H(u)
    double sup_u = 0.0;
    double min_v = 0.0;
    double sup_w = 0.0;
};

/// Extra integrals needed to evaluate both sides of the differential inequalities.
struct AuditSample {
    double t = 0.0;
    double G = 0.0;
    double u_l2 = 0.0;
    double gradw_l2 = 0.0;
    double gradw_l4 = 0.0;
    double gradw_l6 = 0.0;
    double grad_u_l2 = 0.0;       // int |grad u|^2
    double u_l3 = 0.0;            // int u^3
    double fprime_fisher = 0.0;   // int f'(u) |grad u|^2 / u
    double lap_w_l2 = 0.0;        // int (Lap w)^2
    double grad_gradw2_l2 = 0.0;  // int |grad |grad w|^2|^2
};

struct AuditRecord {
    double t = 0.0;
    double dG_dt = 0.0;
    double dG_bound_margin = 0.0;
    double du2_dt_margin = 0.0;
    double dgradw4_dt_margin = 0.0;
    double combined_margin = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double D1 = 0.0;
    double D2 = 0.0;
};

inline constexpr double kDefaultFisherEps = 1e-12;

DiagnosticsRecord record(const State& s, const Params& p, double a, double eps_u = kDefaultFisherEps);

AuditSample audit_sample(const State& s, const Params& p);

/// int |grad u|^2 / (u + eps_u). Cells with u + eps_u == 0 contribute 0 when the
/// gradient vanishes there and +inf otherwise.
double fisher(const ScalarField& u, double eps_u);
double fisher(const State& s, double eps_u);

/// True iff g_at_t0 < 1/(4 cgn) - m^beta |Omega|^(1-beta) / (chi (1-beta)).
bool smallness_check(double g_at_t0, double m, const Params& p, double cgn);

struct MonotonicityReport {
    bool passed = true;
    double max_increment = 0.0;  // largest G(t_{k+1}) - G(t_k); <= 0 for a nonincreasing series
    double interval_start = 0.0;
    double interval_end = 0.0;
    int intervals_checked = 0;
};

/// Examines consecutive pairs with t_k >= t0.
MonotonicityReport check_G_monotone(std::span<const DiagnosticsRecord> records, double t0, double slack);

struct TimeAverage {
    double t_star = 0.0;
    double value_at_t_star = 0.0;
    double average = 0.0;
};

/// Over the records with t in [t/2, t]: the record minimizing int |grad w|^2 and the
/// trapezoidal time average. Throws ValidationError if the series does not cover
/// [t/2, t] with at least two records.
TimeAverage time_average_gradw(std::span<const DiagnosticsRecord> records, double t);

/// Finite-difference audit of the G, int u^2 and int |grad w|^4 evolution
/// inequalities. Margins are right side minus left side; negative values are
/// reported, not enforced. The boundary term is zero on rectangles.
std::vector<AuditRecord> inequality_audit(std::span<const AuditSample> samples, const Params& p, double eps1,
                                          double eps2, double cgn);

/// Centered differences inside, one-sided at the ends.
std::vector<double> time_derivative(std::span<const double> t, std::span<const double> y);

// CSV schemas

inline constexpr const char* kDiagnosticsHeader =
    "t,mass,entropy,fisher,F,G,gradw_l2,gradw_l4,gradw_l6,u_l2,int_H,sup_u,min_v,sup_w";
inline constexpr const char* kAuditHeader =
    "t,dG_dt,dG_bound_margin,du2_dt_margin,dgradw4_dt_margin,combined_margin,eps1,eps2,D1,D2";
inline constexpr const char* kAuditSampleHeader =
    "t,G,u_l2,gradw_l2,gradw_l4,gradw_l6,grad_u_l2,u_l3,fprime_fisher,lap_w_l2,grad_gradw2_l2";

std::string to_csv_row(const DiagnosticsRecord& r);
std::string to_csv_row(const AuditRecord& r);
std::string to_csv_row(const AuditSample& r);

/// Parses a diagnostics CSV; throws ValidationError naming a missing column.
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path);
std::vector<AuditSample> read_audit_samples_csv(const std::string& path);

}  // namespace chemolab
