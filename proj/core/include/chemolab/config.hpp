#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chemolab/grid.hpp"
#include "chemolab/model.hpp"
#include "chemolab/solver.hpp"

namespace chemolab {

enum class InitialPreset { uniform, bump, bumps };
enum class V0Profile { constant, smooth };

struct InitialSpec {
    InitialPreset preset = InitialPreset::bump;
    double mass = 1.0;
    /// Bump center as a fraction of (lx, ly).
    double center_x = 0.5;
    double center_y = 0.5;
    double width = 0.2;
    /// Number of randomly placed bumps for the `bumps` preset.
    int bumps = 3;
    V0Profile v0_profile = V0Profile::constant;
    double v0_max = 1.0;
    /// smooth profile: v0 = v0_max * exp(-amplitude * (1 - cos(pi x/lx) cos(pi y/ly)) / 2)
    double v0_amplitude = 0.5;

    friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct ExperimentConfig {
    // [grid]
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;
    // [model]
    double chi = 0.0;
    double beta = 0.0;
    ConsumptionKind f_kind = ConsumptionKind::power;
    std::string f_table;
    // [initial]
    InitialSpec initial{};
    // [run]
    Formulation formulation = Formulation::transformed;
    double t_end = 0.0;
    double dt_max = 1e-2;
    double record_every = 0.01;
    std::vector<double> snapshot_times;
    double safety = 0.4;
    FaceScheme face_scheme = FaceScheme::central;
    PositivityMode positivity = PositivityMode::limiter;
    DecayMode v_decay = DecayMode::exponential;
    double cg_rtol = 1e-12;
    std::uint64_t seed = 1;
    std::string output = "out";
    // [diagnostics]
    /// Weight of int u w in the entropy functional; unset means 1/2, the window center.
    std::optional<double> a;
    double eps1 = 1.0 / 6.0;
    double eps2 = 1.0 / 3.0;
    /// Unset means probe the grid and multiply by cgn_safety.
    std::optional<double> cgn;
    double cgn_safety = 1.5;
    int probe_samples = 64;
    /// Eventual gradient bound for the threshold report; unset means half the admissible window.
    std::optional<double> M;
    double eps_u = 1e-12;

    [[nodiscard]] double effective_a() const { return a.value_or(0.5); }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct SweepSpec {
    ExperimentConfig base;
    std::vector<double> chi;
    std::vector<double> beta;
    std::vector<double> mass;
    std::vector<int> nx;
};

/// Parses `key = value` lines grouped under [section] headers ('#' starts a
/// comment). Throws ValidationError naming the offending key for unknown keys,
/// out-of-range values and missing required keys. Non-fatal remarks (e.g. an
/// explicit a outside the admissible window) are appended to *warnings.
ExperimentConfig parse_config_text(const std::string& text, std::vector<std::string>* warnings = nullptr);
ExperimentConfig parse_config(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Same text plus a [sweep] section whose keys (chi, beta, mass, nx) take comma lists.
SweepSpec parse_sweep_text(const std::string& text);
SweepSpec parse_sweep(const std::filesystem::path& path);

/// Emits every field, exactly (parse_config_text(write_config(c)) == c).
std::string write_config(const ExperimentConfig& cfg);

/// Cartesian product of the sweep axes; axes left empty keep the base value.
std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec);
/// Directory name for one sweep cell, injective in the active axis values.
std::string sweep_cell_name(const SweepSpec& spec, const ExperimentConfig& cell);

Grid grid_of(const ExperimentConfig& cfg);
/// Model parameters with v0_max taken from the realized initial signal.
Params params_of(const ExperimentConfig& cfg, double v0_max);
StepOptions step_options_of(const ExperimentConfig& cfg);

std::string format_exact(double v);

}  // namespace chemolab
