#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "chemolab/config.hpp"
#include "chemolab/errors.hpp"
#include "chemolab/initial_data.hpp"
#include "test_support.hpp"

using namespace chemolab;

namespace {

const char* kMinimal = R"(
[grid]
nx = 16
ny = 8
[model]
chi = 0.5
beta = 0.5
[initial]
mass = 0.25
[run]
t_end = 1.0
)";

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

std::string with(const std::string& section, const std::string& line) {
    std::string text = kMinimal;
    const std::string header = "[" + section + "]\n";
    const auto pos = text.find(header);
    if (pos == std::string::npos) return text + header + line + "\n";
    return text.insert(pos + header.size(), line + "\n");
}

}  // namespace

TEST_CASE("defaults from a minimal config") {
    const ExperimentConfig c = parse_config_text(kMinimal);
    CHECK(c.nx == 16);
    CHECK(c.ny == 8);
    CHECK(c.lx == 1.0);
    CHECK(c.chi == 0.5);
    CHECK(c.initial.mass == 0.25);
    CHECK(c.initial.preset == InitialPreset::bump);
    CHECK(c.formulation == Formulation::transformed);
    CHECK(c.positivity == PositivityMode::limiter);
    CHECK(c.face_scheme == FaceScheme::central);
    CHECK(c.dt_max == 1e-2);
    CHECK(c.safety == 0.4);
    CHECK_FALSE(c.a.has_value());
    CHECK(c.effective_a() == 0.5);
    CHECK_FALSE(c.cgn.has_value());
    CHECK_FALSE(c.M.has_value());
    CHECK(c.eps1 == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("range errors name the key") {
    const std::string text = std::string(kMinimal);
    std::string bad = text;
    bad.replace(bad.find("chi = 0.5"), 9, "chi = 1.2");
    CHECK(error_of(bad) == "model.chi: must be in (0,1), got 1.2");
    CHECK(error_of(with("grid", "lx = -1")).find("grid.lx") == 0);
    CHECK(error_of(with("run", "record_every = 0")).find("run.record_every") == 0);
    CHECK(error_of(with("diagnostics", "cgn = -2")).find("diagnostics.cgn") == 0);
}

TEST_CASE("unknown, duplicate, missing and malformed entries") {
    CHECK(error_of(with("grid", "nz = 4")).find("grid.nz: unknown key") == 0);
    CHECK(error_of(with("grid", "nx = 4")).find("grid.nx: duplicate key") == 0);
    std::string missing = kMinimal;
    missing.erase(missing.find("t_end = 1.0"), 11);
    CHECK(error_of(missing) == "run.t_end: missing required key");
    CHECK(error_of(with("run", "positivity = sometimes")).find("run.positivity: unknown value 'sometimes'") == 0);
    CHECK(error_of(with("grid", "lx = abc")).find("grid.lx: expected a number") == 0);
    CHECK(error_of(with("grid", "bogus line")).find("expected 'key = value'") == 0);
    CHECK(error_of(std::string(kMinimal) + "[broken\n").find("malformed section header") == 0);
    CHECK(error_of(with("model", "f = tabulated")).find("model.f_table") == 0);
    CHECK_THROWS_AS(parse_config("/nonexistent/config.toml"), ValidationError);
}

TEST_CASE("comments, quotes and lists") {
    const ExperimentConfig c = parse_config_text(with("run", "output = \"out/with # hash\"  # trailing comment\n"
                                                             "snapshot_times = [0, 0.5, 1]\n"
                                                             "formulation = original"));
    CHECK(c.output == "out/with # hash");
    CHECK(c.snapshot_times == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(c.formulation == Formulation::original);
}

TEST_CASE("explicit a outside the window warns") {
    std::vector<std::string> warnings;
    const ExperimentConfig c = parse_config_text(with("diagnostics", "a = 0.05"), &warnings);
    CHECK(c.effective_a() == 0.05);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("diagnostics.a") == 0);
    warnings.clear();
    parse_config_text(with("diagnostics", "a = 0.5"), &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("write_config round trip on random configs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(1e-3, 1.0 - 1e-3);
    std::uniform_int_distribution<int> small(3, 300);
    for (int trial = 0; trial < 200; ++trial) {
        ExperimentConfig c = parse_config_text(kMinimal);
        c.nx = small(rng);
        c.ny = small(rng);
        c.lx = 10.0 * u01(rng);
        c.ly = u01(rng) / 3.0;
        c.chi = u01(rng);
        c.beta = u01(rng);
        c.initial.preset = static_cast<InitialPreset>(trial % 3);
        c.initial.mass = std::exp(20.0 * (u01(rng) - 0.5));
        c.initial.center_x = u01(rng);
        c.initial.width = u01(rng);
        c.initial.bumps = 1 + trial % 5;
        c.initial.v0_profile = static_cast<V0Profile>(trial % 2);
        c.initial.v0_max = 1.0 + u01(rng);
        c.formulation = static_cast<Formulation>(trial % 2);
        c.positivity = static_cast<PositivityMode>(trial % 3);
        c.face_scheme = trial % 2 ? FaceScheme::upwind : FaceScheme::central;
        c.t_end = 100.0 * u01(rng);
        c.record_every = u01(rng) / 7.0;
        c.snapshot_times = {0.0, u01(rng), 1.0 / 3.0};
        c.seed = rng();
        c.output = "out/run " + std::to_string(trial);
        if (trial % 2) c.a = u01(rng);
        if (trial % 3) c.cgn = 1.0 + u01(rng);
        if (trial % 5) c.M = u01(rng) / 100.0;
        c.eps1 = u01(rng);
        const ExperimentConfig back = parse_config_text(write_config(c));
        CHECK(back == c);
    }
}

TEST_CASE("sweep expansion") {
    const std::string text = std::string(kMinimal) + "[sweep]\nbeta = [0.25, 0.5, 0.75]\nmass = [0.01, 1]\n";
    const SweepSpec spec = parse_sweep_text(text);
    const auto cells = expand_sweep(spec);
    REQUIRE(cells.size() == 6);
    std::set<std::string> names;
    std::set<std::pair<double, double>> combos;
    for (const auto& c : cells) {
        names.insert(sweep_cell_name(spec, c));
        combos.insert({c.beta, c.initial.mass});
        CHECK(c.chi == 0.5);
        CHECK(c.nx == 16);
    }
    CHECK(names.size() == 6);
    CHECK(combos.size() == 6);
    CHECK(names.count("beta-0.25_mass-0.01") == 1);

    const SweepSpec grid_sweep = parse_sweep_text(std::string(kMinimal) + "[sweep]\nnx = [32, 64]\n");
    const auto gcells = expand_sweep(grid_sweep);
    REQUIRE(gcells.size() == 2);
    CHECK(gcells[1].nx == 64);
    CHECK(gcells[1].ny == 32);

    CHECK_THROWS_AS(parse_sweep_text(std::string(kMinimal) + "[sweep]\nbeta = [0.5, 1.5]\n"), ValidationError);
    CHECK_THROWS_AS(parse_sweep_text(std::string(kMinimal) + "[sweep]\ngamma = [1]\n"), ValidationError);
    CHECK_THROWS_AS(parse_sweep_text(kMinimal), ValidationError);
}

TEST_CASE("initial data") {
    ExperimentConfig c = parse_config_text(kMinimal);
    const Grid g = grid_of(c);
    for (InitialPreset preset : {InitialPreset::uniform, InitialPreset::bump, InitialPreset::bumps}) {
        InitialSpec spec = c.initial;
        spec.preset = preset;
        spec.mass = 3.7;
        const ScalarField u = initial_density(g, spec, 42);
        CHECK(integrate(u) == doctest::Approx(3.7).epsilon(1e-14));
        CHECK(u.min() >= 0.0);
        CHECK(initial_density(g, spec, 42) == u);
    }
    InitialSpec spec = c.initial;
    spec.preset = InitialPreset::bumps;
    CHECK_FALSE(initial_density(g, spec, 1) == initial_density(g, spec, 2));

    spec.v0_profile = V0Profile::smooth;
    spec.v0_max = 2.0;
    const ScalarField v = initial_signal(g, spec);
    CHECK(v.min() > 0.0);
    CHECK(v.max() <= 2.0);

    c.initial.v0_profile = V0Profile::smooth;
    c.formulation = Formulation::transformed;
    const InitialCondition ic = make_initial_condition(c);
    CHECK(ic.params.v0_max == doctest::Approx(initial_signal(g, c.initial).max()).epsilon(1e-15));
    CHECK(ic.state.signal.min() >= 0.0);
    CHECK(ic.state.signal.min() <= 1e-15);
    CHECK(ic.state.t == 0.0);
}
