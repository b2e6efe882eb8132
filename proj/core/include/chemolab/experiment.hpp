#pragma once

#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemolab/config.hpp"
#include "chemolab/diagnostics.hpp"
#include "chemolab/model.hpp"
#include "chemolab/solver.hpp"

namespace chemolab {

struct InvariantCheck {
    std::string name;
    bool passed = true;
    /// Largest violation amount seen (<= 0 means every sample was inside the bound).
    double worst = 0.0;
    double tolerance = 0.0;
    double t_worst = 0.0;
};

/// Hard invariants that can be re-derived from the diagnostics series alone:
/// mass conservation, entropy and F lower bounds, the two G bounds, int H <= 0,
/// min v > 0 and finiteness.
std::vector<InvariantCheck> check_record_invariants(std::span<const DiagnosticsRecord> records, const Params& p);

/// Extrema tracked after every step (not recoverable from records).
struct RuntimeBounds {
    double v0_max = 1.0;
    double min_u = std::numeric_limits<double>::infinity();
    double max_v = -std::numeric_limits<double>::infinity();
    double min_v = std::numeric_limits<double>::infinity();
    double min_w = std::numeric_limits<double>::infinity();
    double clip_mass = 0.0;
    long long limited_cells = 0;
    long long steps = 0;

    void observe(const State& s, const Params& p, const StepReport* rep);
};

std::vector<InvariantCheck> check_runtime_invariants(const RuntimeBounds& b, PositivityMode mode);

/// y(t) <= C (1 + t) envelope: C = max y/(1+t); plus the least-squares line.
struct EnvelopeFit {
    double C = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
};
EnvelopeFit fit_linear_envelope(std::span<const double> t, std::span<const double> y);

struct ScenarioReport {
    double cgn = 0.0;
    ThresholdReport thresholds{};
    /// First record time at which smallness_check holds.
    std::optional<double> t_star;
    double G_at_t_star = 0.0;
    double monotone_slack = 0.0;
    MonotonicityReport G_after_t_star{};
    std::optional<TimeAverage> time_average;
    double sup_u_all = 0.0;
    std::optional<double> sup_u_1_2;
    std::optional<double> sup_u_1_end;
    std::optional<bool> bounded_indicator;
    EnvelopeFit entropy_fit{};
    EnvelopeFit fisher_fit{};
};

/// t*, G monotonicity after t* with slack 1e-6 |G(t*)| + 1e-10 per interval,
/// boundedness indicator sup_[1,end] sup u <= 2 sup_[1,2] sup u, and the
/// entropy / cumulative-fisher linear envelopes.
ScenarioReport analyze_records(std::span<const DiagnosticsRecord> records, const Params& p, double cgn, double M,
                               double a);

/// Working GN constant: the configured value or the probe times cgn_safety.
double working_cgn(const ExperimentConfig& cfg);
/// Eventual gradient bound: the configured value or half of 9/(17*32*cgn).
double working_M(const ExperimentConfig& cfg, double cgn);

enum class RunStatus { completed, halted, numerical_failure };

struct RunOptions {
    /// Ignore any resume marker and start from t = 0.
    bool fresh = false;
    /// Stop after writing this many records without a final checkpoint (simulates a kill).
    std::optional<int> halt_after_records;
    int checkpoint_every = 10;
    std::FILE* progress = nullptr;
};

struct RunResult {
    RunStatus status = RunStatus::completed;
    std::string message;
    std::filesystem::path dir;
    bool resumed = false;
    State final_state;
    Params params;
    std::vector<DiagnosticsRecord> records;
    std::vector<InvariantCheck> invariants;
    RuntimeBounds runtime;
    ScenarioReport scenario;

    [[nodiscard]] bool invariants_ok() const;
};

/// Integrates cfg to t_end writing into cfg.output: diagnostics.csv,
/// audit_samples.csv, audit.csv, thresholds.txt, summary.txt, config.toml,
/// snapshots/ and the resume marker. Resumes from the marker when the directory
/// holds an unfinished run of the same config.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// 0 success, 3 numerical failure, 4 invariant violation.
int exit_code_of(const RunResult& r);

struct VerifyResult {
    std::vector<InvariantCheck> checks;
    std::vector<std::string> mismatches;
    [[nodiscard]] bool all_passed() const;
};

/// Re-checks the record invariants of a finished run directory from its CSV and
/// config, and compares each verdict with the one written in summary.txt.
VerifyResult verify_run(const std::filesystem::path& dir);

struct SweepCellResult {
    std::string name;
    ExperimentConfig cfg;
    RunStatus status = RunStatus::completed;
    int exit_code = 0;
    std::string message;
    double sup_u = 0.0;
    std::optional<double> t_star;
};

/// Runs every cell of the sweep in <out>/<cell name> using up to `jobs` threads
/// and writes <out>/sweep_index.csv.
std::vector<SweepCellResult> run_sweep(const SweepSpec& spec, const std::filesystem::path& out, int jobs,
                                       const RunOptions& opts = {});

std::string format_threshold_report(const ThresholdReport& r);

}  // namespace chemolab
