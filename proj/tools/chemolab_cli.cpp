#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "chemolab/config.hpp"
#include "chemolab/errors.hpp"
#include "chemolab/experiment.hpp"
#include "chemolab/gn_probe.hpp"
#include "chemolab/mms.hpp"
#include "chemolab/model.hpp"

namespace {

using namespace chemolab;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInvariant = 4;

struct RunArgs {
    std::string config;
    std::string output;
    bool fresh = false;
    int halt_after = 0;
    int checkpoint_every = 10;
    bool quiet = false;
};

struct SweepArgs {
    std::string config;
    std::string output;
    int jobs = 1;
    bool fresh = false;
};

struct ProbeArgs {
    int nx = 64;
    int ny = 64;
    double lx = 1.0;
    double ly = 1.0;
    int samples = 64;
    std::string mode = "all";
    std::uint64_t seed = GnProbeOptions{}.seed;
    int max_mode = GnProbeOptions{}.max_mode;
    double safety = 1.5;
};

struct MmsArgs {
    std::string which = "transformed";
    int levels = 4;
    MmsOptions opts;
};

struct ThresholdArgs {
    double chi = 0.5;
    double beta = 0.5;
    double mass = 1.0;
    double area = 1.0;
    double a = 0.5;
    std::optional<double> cgn;
    std::optional<double> M;
    int nx = 64;
    int samples = 64;
};

int do_run(const RunArgs& args) {
    std::vector<std::string> warnings;
    ExperimentConfig cfg = parse_config(args.config, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!args.output.empty()) cfg.output = args.output;
    RunOptions opts;
    opts.fresh = args.fresh;
    opts.checkpoint_every = args.checkpoint_every;
    if (args.halt_after > 0) opts.halt_after_records = args.halt_after;
    opts.progress = args.quiet ? nullptr : stderr;
    const RunResult r = run_experiment(cfg, opts);
    if (r.resumed) std::cerr << "resumed from " << (r.dir / "resume.marker").string() << "\n";
    if (r.status == RunStatus::halted) {
        std::cout << "halted after " << r.records.size() << " records at t = " << format_exact(r.final_state.t)
                  << "\n";
        return 0;
    }
    std::cout << "status: " << (r.status == RunStatus::completed ? "completed" : "numerical failure") << "\n";
    if (!r.message.empty()) std::cout << "message: " << r.message << "\n";
    for (const auto& c : r.invariants) {
        std::cout << (c.passed ? "  pass " : "  FAIL ") << c.name << "  worst=" << format_exact(c.worst)
                  << "  tol=" << format_exact(c.tolerance) << "\n";
    }
    std::cout << "sup u = " << format_exact(r.scenario.sup_u_all) << "\n";
    std::cout << "t* = " << (r.scenario.t_star ? format_exact(*r.scenario.t_star) : "none") << "\n";
    std::cout << "outputs in " << r.dir.string() << "\n";
    return exit_code_of(r);
}

int do_sweep(const SweepArgs& args) {
    const SweepSpec spec = parse_sweep(args.config);
    const std::string out = args.output.empty() ? spec.base.output : args.output;
    RunOptions opts;
    opts.fresh = args.fresh;
    opts.progress = stderr;
    const auto results = run_sweep(spec, out, args.jobs, opts);
    int worst = 0;
    for (const auto& r : results) {
        std::cout << r.name << "  exit=" << r.exit_code << "  sup_u=" << format_exact(r.sup_u);
        if (!r.message.empty()) std::cout << "  (" << r.message << ")";
        std::cout << "\n";
        worst = std::max(worst, r.exit_code);
    }
    std::cout << "index: " << out << "/sweep_index.csv\n";
    return worst;
}

int do_probe(const ProbeArgs& args) {
    const Grid grid = build_grid(args.nx, args.ny, args.lx, args.ly);
    GnProbeOptions opts;
    opts.seed = args.seed;
    opts.max_mode = args.max_mode;
    double best = 0.0;
    auto report = [&](GnMode mode) {
        const double v = gn_probe(grid, args.samples, mode, opts);
        best = std::max(best, v);
        std::cout << to_string(mode) << " = " << format_exact(v) << "\n";
    };
    if (args.mode == "all") {
        for (GnMode m : {GnMode::ineq_4_2_2, GnMode::ineq_L3, GnMode::ladyzhenskaya}) report(m);
    } else {
        report(parse_gn_mode(args.mode));
    }
    std::cout << "working_cgn = " << format_exact(args.safety * best) << "  (safety " << format_exact(args.safety)
              << ")\n";
    return 0;
}

int do_verify(const std::string& dir) {
    const VerifyResult v = verify_run(dir);
    for (const auto& c : v.checks) {
        std::cout << (c.passed ? "  pass " : "  FAIL ") << c.name << "  worst=" << format_exact(c.worst)
                  << "  tol=" << format_exact(c.tolerance) << "\n";
    }
    for (const auto& m : v.mismatches) std::cout << "  MISMATCH " << m << "\n";
    if (!v.mismatches.empty()) return kExitInvariant;
    return v.all_passed() ? 0 : kExitInvariant;
}

int do_mms(const MmsArgs& args) {
    MmsCase which = MmsCase::transformed;
    if (args.which == "diffusion") {
        which = MmsCase::diffusion;
    } else if (args.which == "original") {
        which = MmsCase::original;
    } else if (args.which != "transformed") {
        throw ValidationError("--case must be diffusion, transformed or original");
    }
    const auto levels = mms_convergence(which, args.levels, args.opts);
    const auto orders = observed_orders(levels);
    std::printf("%6s %12s %12s %8s %14s %8s\n", "n", "h", "dt", "steps", "error", "order");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto& l = levels[k];
        if (k == 0) {
            std::printf("%6d %12.4e %12.4e %8d %14.6e %8s\n", l.n, l.h, l.dt, l.steps, l.error, "");
        } else {
            std::printf("%6d %12.4e %12.4e %8d %14.6e %8.3f\n", l.n, l.h, l.dt, l.steps, l.error, orders[k - 1]);
        }
    }
    return 0;
}

int do_thresholds(const ThresholdArgs& args) {
    Params p;
    p.chi = args.chi;
    p.beta = args.beta;
    p.domain_area = args.area;
    validate(p);
    double cgn = 0.0;
    if (args.cgn) {
        cgn = *args.cgn;
    } else {
        cgn = probe_working_cgn(build_grid(args.nx, args.nx, 1.0, args.area), args.samples);
    }
    const double M = args.M.value_or(0.5 * 9.0 / (17.0 * 32.0 * cgn));
    std::cout << format_threshold_report(threshold_boundedness(args.mass, p, cgn, M, args.a));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chemolab: finite-volume lab for singular-sensitivity chemotaxis-consumption systems"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Integrate one experiment config");
    run->add_option("config", run_args.config, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", run_args.output, "Override the output directory");
    run->add_flag("--fresh", run_args.fresh, "Ignore any resume marker");
    run->add_option("--halt-after", run_args.halt_after, "Stop after N records without checkpointing (testing)");
    run->add_option("--checkpoint-every", run_args.checkpoint_every, "Records between checkpoints")
        ->check(CLI::PositiveNumber);
    run->add_flag("-q,--quiet", run_args.quiet, "No progress output");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Run the cartesian product of a [sweep] section");
    sweep->add_option("config", sweep_args.config, "Sweep config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--output", sweep_args.output, "Output root directory");
    sweep->add_option("-j,--jobs", sweep_args.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    sweep->add_flag("--fresh", sweep_args.fresh, "Ignore resume markers");

    ProbeArgs probe_args;
    auto* probe = app.add_subcommand("probe-gn", "Empirical Gagliardo-Nirenberg ratios on a grid");
    probe->add_option("--nx", probe_args.nx);
    probe->add_option("--ny", probe_args.ny);
    probe->add_option("--lx", probe_args.lx);
    probe->add_option("--ly", probe_args.ly);
    probe->add_option("-n,--samples", probe_args.samples)->check(CLI::PositiveNumber);
    probe->add_option("--mode", probe_args.mode, "ineq_4_2_2, ineq_L3, ladyzhenskaya or all");
    probe->add_option("--seed", probe_args.seed);
    probe->add_option("--max-mode", probe_args.max_mode)->check(CLI::PositiveNumber);
    probe->add_option("--safety", probe_args.safety);

    std::string verify_dir;
    auto* verify = app.add_subcommand("verify", "Re-check a run directory's invariants from its CSV");
    verify->add_option("dir", verify_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    MmsArgs mms_args;
    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence table");
    mms->add_option("--case", mms_args.which, "diffusion, transformed or original");
    mms->add_option("--levels", mms_args.levels);
    mms->add_option("--start-n", mms_args.opts.start_n);
    mms->add_option("--t-end", mms_args.opts.t_end);
    mms->add_option("--dt-factor", mms_args.opts.dt_factor);
    mms->add_option("--chi", mms_args.opts.chi);
    mms->add_option("--beta", mms_args.opts.beta);

    ThresholdArgs th_args;
    auto* th = app.add_subcommand("thresholds", "Print the threshold report for given parameters");
    th->add_option("--chi", th_args.chi);
    th->add_option("--beta", th_args.beta);
    th->add_option("--mass", th_args.mass);
    th->add_option("--area", th_args.area);
    th->add_option("--a", th_args.a);
    th->add_option("--cgn", th_args.cgn, "GN constant (default: probe a grid)");
    th->add_option("--M", th_args.M, "Eventual gradient bound (default: half the window)");
    th->add_option("--probe-nx", th_args.nx);
    th->add_option("--probe-samples", th_args.samples);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    try {
        if (*run) return do_run(run_args);
        if (*sweep) return do_sweep(sweep_args);
        if (*probe) return do_probe(probe_args);
        if (*verify) return do_verify(verify_dir);
        if (*mms) return do_mms(mms_args);
        if (*th) return do_thresholds(th_args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
