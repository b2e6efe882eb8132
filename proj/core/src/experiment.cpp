#include "chemolab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "chemolab/errors.hpp"
#include "chemolab/field_io.hpp"
#include "chemolab/gn_probe.hpp"
#include "chemolab/initial_data.hpp"

namespace chemolab {

namespace fs = std::filesystem;

namespace {

constexpr double kBoundTol = 1e-12;
constexpr double kPointTol = 1e-13;

void track(InvariantCheck& c, double violation, double t) {
    if (violation > c.worst || std::isnan(violation)) {
        c.worst = violation;
        c.t_worst = t;
    }
}

InvariantCheck make_check(std::string name, double tol) {
    InvariantCheck c;
    c.name = std::move(name);
    c.worst = -std::numeric_limits<double>::infinity();
    c.tolerance = tol;
    return c;
}

void finish(InvariantCheck& c) { c.passed = !std::isnan(c.worst) && c.worst <= c.tolerance; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
    std::map<std::string, std::string> kv;
    std::istringstream in(read_text(path));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::string verdict(const InvariantCheck& c) {
    return std::string(c.passed ? "pass" : "fail") + " worst=" + format_exact(c.worst) +
           " tol=" + format_exact(c.tolerance) + " t=" + format_exact(c.t_worst);
}

std::string snapshot_tag(double t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "t%.6f", t);
    return buf;
}

}  // namespace

std::vector<InvariantCheck> check_record_invariants(std::span<const DiagnosticsRecord> records, const Params& p) {
    auto mass = make_check("mass_conservation", kBoundTol);
    auto entropy = make_check("entropy_lower_bound", kBoundTol);
    auto F = make_check("F_lower_bound", kBoundTol);
    auto G_upper = make_check("G_upper_bound", kBoundTol);
    auto gradw = make_check("gradw_l2_bound", kBoundTol);
    auto H = make_check("int_H_nonpositive", 0.0);
    auto vpos = make_check("min_v_positive", 0.0);
    auto finite = make_check("finite", 0.0);
    const double floor = -p.domain_area / std::numbers::e;
    const double m0 = records.empty() ? 0.0 : records.front().mass;
    for (const auto& r : records) {
        track(mass, std::abs(r.mass - m0) / m0, r.t);
        track(entropy, floor - r.entropy, r.t);
        track(F, floor - r.F, r.t);
        track(G_upper, r.G - 0.5 * r.gradw_l2, r.t);
        const double holder =
            2.0 * std::pow(r.mass, p.beta) * std::pow(p.domain_area, 1.0 - p.beta) / (p.chi * (1.0 - p.beta));
        track(gradw, r.gradw_l2 - 2.0 * r.G - holder, r.t);
        track(H, r.int_H, r.t);
        // strict: min v must be > 0, so 0 itself is a violation
        track(vpos, r.min_v > 0.0 ? -r.min_v : 1.0, r.t);
        const bool ok = std::isfinite(r.mass) && std::isfinite(r.entropy) && std::isfinite(r.fisher) &&
                        std::isfinite(r.F) && std::isfinite(r.G) && std::isfinite(r.gradw_l2) &&
                        std::isfinite(r.gradw_l4) && std::isfinite(r.gradw_l6) && std::isfinite(r.u_l2) &&
                        std::isfinite(r.int_H) && std::isfinite(r.sup_u) && std::isfinite(r.min_v) &&
                        std::isfinite(r.sup_w);
        track(finite, ok ? 0.0 : 1.0, r.t);
    }
    std::vector<InvariantCheck> out{mass, entropy, F, G_upper, gradw, H, vpos, finite};
    for (auto& c : out) finish(c);
    return out;
}

void RuntimeBounds::observe(const State& s, const Params& p, const StepReport* rep) {
    min_u = std::min(min_u, s.u.min());
    if (s.formulation == Formulation::transformed) {
        const double wmin = s.signal.min();
        const double wmax = s.signal.max();
        min_w = std::min(min_w, wmin);
        max_v = std::max(max_v, p.v0_max * std::exp(-wmin));
        min_v = std::min(min_v, p.v0_max * std::exp(-wmax));
    } else {
        const double vmax = s.signal.max();
        const double vmin = s.signal.min();
        max_v = std::max(max_v, vmax);
        min_v = std::min(min_v, vmin);
        min_w = std::min(min_w, -std::log(vmax / p.v0_max));
    }
    v0_max = p.v0_max;
    if (rep) {
        clip_mass += rep->positivity_clip_mass;
        limited_cells += rep->limited_cells;
        ++steps;
    }
}

std::vector<InvariantCheck> check_runtime_invariants(const RuntimeBounds& b, PositivityMode mode) {
    auto u = make_check("runtime_u_nonnegative", kPointTol);
    u.worst = -b.min_u;
    auto vmax = make_check("runtime_v_upper_bound", kPointTol);
    vmax.worst = b.max_v - b.v0_max;
    auto vmin = make_check("runtime_v_positive", 0.0);
    vmin.worst = b.min_v > 0.0 ? -b.min_v : 1.0;
    auto w = make_check("runtime_w_nonnegative", kPointTol);
    w.worst = -b.min_w;
    std::vector<InvariantCheck> out{u, vmax, vmin, w};
    if (mode == PositivityMode::limiter) {
        auto clip = make_check("runtime_clip_mass_zero", 0.0);
        clip.worst = std::abs(b.clip_mass);
        out.push_back(clip);
    }
    for (auto& c : out) finish(c);
    return out;
}

EnvelopeFit fit_linear_envelope(std::span<const double> t, std::span<const double> y) {
    EnvelopeFit fit;
    if (t.empty()) return fit;
    fit.C = -std::numeric_limits<double>::infinity();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        fit.C = std::max(fit.C, y[k] / (1.0 + t[k]));
        st += t[k];
        sy += y[k];
        stt += t[k] * t[k];
        sty += t[k] * y[k];
    }
    const double n = static_cast<double>(t.size());
    const double den = n * stt - st * st;
    if (den > 0.0) {
        fit.slope = (n * sty - st * sy) / den;
        fit.intercept = (sy - fit.slope * st) / n;
    } else {
        fit.intercept = sy / n;
    }
    return fit;
}

ScenarioReport analyze_records(std::span<const DiagnosticsRecord> records, const Params& p, double cgn, double M,
                               double a) {
    ScenarioReport rep;
    rep.cgn = cgn;
    if (records.empty()) return rep;
    rep.thresholds = threshold_boundedness(records.front().mass, p, cgn, M, a);
    for (const auto& r : records) {
        if (smallness_check(r.G, r.mass, p, cgn)) {
            rep.t_star = r.t;
            rep.G_at_t_star = r.G;
            break;
        }
    }
    if (rep.t_star) {
        rep.monotone_slack = 1e-6 * std::abs(rep.G_at_t_star) + 1e-10;
        rep.G_after_t_star = check_G_monotone(records, *rep.t_star, rep.monotone_slack);
    }
    const double t_end = records.back().t;
    if (t_end > 0.0) {
        try {
            rep.time_average = time_average_gradw(records, t_end);
        } catch (const ValidationError&) {
        }
    }
    double s12 = -1.0, s1e = -1.0;
    for (const auto& r : records) {
        rep.sup_u_all = std::max(rep.sup_u_all, r.sup_u);
        if (r.t >= 1.0) s1e = std::max(s1e, r.sup_u);
        if (r.t >= 1.0 && r.t <= 2.0) s12 = std::max(s12, r.sup_u);
    }
    if (t_end >= 2.0 && s12 >= 0.0) {
        rep.sup_u_1_2 = s12;
        rep.sup_u_1_end = s1e;
        rep.bounded_indicator = s1e <= 2.0 * s12;
    }
    std::vector<double> t, ent, cum;
    double acc = 0.0;
    for (std::size_t k = 0; k < records.size(); ++k) {
        t.push_back(records[k].t);
        ent.push_back(records[k].entropy);
        if (k > 0) acc += 0.5 * (records[k].fisher + records[k - 1].fisher) * (records[k].t - records[k - 1].t);
        cum.push_back(acc);
    }
    rep.entropy_fit = fit_linear_envelope(t, ent);
    rep.fisher_fit = fit_linear_envelope(t, cum);
    return rep;
}

double working_cgn(const ExperimentConfig& cfg) {
    if (cfg.cgn) return *cfg.cgn;
    return probe_working_cgn(grid_of(cfg), cfg.probe_samples, cfg.cgn_safety);
}

double working_M(const ExperimentConfig& cfg, double cgn) {
    if (cfg.M) return *cfg.M;
    return 0.5 * 9.0 / (17.0 * 32.0 * cgn);
}

bool RunResult::invariants_ok() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const auto& c) { return c.passed; });
}

int exit_code_of(const RunResult& r) {
    if (r.status == RunStatus::numerical_failure) return 3;
    if (!r.invariants_ok()) return 4;
    return 0;
}

bool VerifyResult::all_passed() const {
    return mismatches.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string format_threshold_report(const ThresholdReport& r) {
    std::ostringstream o;
    auto x = format_exact;
    o << "a_minus = " << x(r.a_minus) << "\n"
      << "a_plus = " << x(r.a_plus) << "\n"
      << "a = " << x(r.a) << "\n"
      << "c0 = " << x(r.c0) << "\n"
      << "g_threshold = " << x(r.g_threshold) << "\n"
      << "M = " << x(r.M) << "\n"
      << "M_window_upper = " << x(r.M_window_upper) << "\n"
      << "eps1 = " << x(r.eps1) << "\n"
      << "eps2 = " << x(r.eps2) << "\n"
      << "gamma = " << x(r.gamma) << "\n"
      << "m_bar = " << x(r.m_bar) << "\n"
      << "m_star_bound = " << x(r.m_star_bound) << "\n"
      << "cgn_used = " << x(r.cgn_used) << "\n";
    return o.str();
}

namespace {

struct Marker {
    bool complete = false;
    long long step = 0;
    double t = 0.0;
    int next_record = 0;
    std::size_t next_snapshot = 0;
    std::uintmax_t diagnostics_bytes = 0;
    std::uintmax_t audit_bytes = 0;
    RuntimeBounds runtime;
};

std::string format_marker(const Marker& m) {
    std::ostringstream o;
    auto x = format_exact;
    o << "complete = " << (m.complete ? 1 : 0) << "\n"
      << "step = " << m.step << "\n"
      << "t = " << x(m.t) << "\n"
      << "next_record = " << m.next_record << "\n"
      << "next_snapshot = " << m.next_snapshot << "\n"
      << "diagnostics_bytes = " << m.diagnostics_bytes << "\n"
      << "audit_bytes = " << m.audit_bytes << "\n"
      << "u = checkpoint/u.cplf\n"
      << "signal = checkpoint/signal.cplf\n"
      << "runtime = " << x(m.runtime.v0_max) << " " << x(m.runtime.min_u) << " " << x(m.runtime.max_v) << " "
      << x(m.runtime.min_v) << " " << x(m.runtime.min_w) << " " << x(m.runtime.clip_mass) << " "
      << m.runtime.limited_cells << " " << m.runtime.steps << "\n";
    return o.str();
}

Marker parse_marker(const fs::path& path) {
    const auto kv = read_key_values(path);
    auto get = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ValidationError(path.string() + ": resume marker lacks '" + key + "'");
        return it->second;
    };
    Marker m;
    m.complete = get("complete") == "1";
    m.step = std::stoll(get("step"));
    m.t = std::stod(get("t"));
    m.next_record = std::stoi(get("next_record"));
    m.next_snapshot = std::stoull(get("next_snapshot"));
    m.diagnostics_bytes = std::stoull(get("diagnostics_bytes"));
    m.audit_bytes = std::stoull(get("audit_bytes"));
    std::istringstream rt(get("runtime"));
    std::string tok[6];
    for (auto& s : tok) rt >> s;
    rt >> m.runtime.limited_cells >> m.runtime.steps;
    m.runtime.v0_max = std::stod(tok[0]);
    m.runtime.min_u = std::stod(tok[1]);
    m.runtime.max_v = std::stod(tok[2]);
    m.runtime.min_v = std::stod(tok[3]);
    m.runtime.min_w = std::stod(tok[4]);
    m.runtime.clip_mass = std::stod(tok[5]);
    if (!rt) throw ValidationError(path.string() + ": malformed runtime line in resume marker");
    return m;
}

void write_atomically(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    write_text(tmp, text);
    fs::rename(tmp, path);
}

std::string summary_text(const RunResult& r, const ExperimentConfig& cfg) {
    std::ostringstream o;
    auto x = format_exact;
    const char* status = r.status == RunStatus::completed ? "completed"
                         : r.status == RunStatus::halted  ? "halted"
                                                          : "numerical_failure";
    o << "status = " << status << "\n";
    o << "message = " << r.message << "\n";
    o << "formulation = " << (cfg.formulation == Formulation::transformed ? "transformed" : "original") << "\n";
    o << "steps = " << r.runtime.steps << "\n";
    o << "t_final = " << x(r.final_state.t) << "\n";
    o << "t_end = " << x(cfg.t_end) << "\n";
    o << "records = " << r.records.size() << "\n";
    o << "v0_max = " << x(r.params.v0_max) << "\n";
    o << "mass0 = " << x(r.records.empty() ? 0.0 : r.records.front().mass) << "\n";
    o << "cgn = " << x(r.scenario.cgn) << "\n";
    o << "a = " << x(cfg.effective_a()) << "\n";
    o << "c0 = " << x(r.scenario.thresholds.c0) << "\n";
    o << "g_threshold = " << x(r.scenario.thresholds.g_threshold) << "\n";
    o << "m_star_bound = " << x(r.scenario.thresholds.m_star_bound) << "\n";
    o << "all_invariants = " << (r.invariants_ok() ? "pass" : "fail") << "\n";
    for (const auto& c : r.invariants) o << "invariant." << c.name << " = " << verdict(c) << "\n";
    o << "runtime.min_u = " << x(r.runtime.min_u) << "\n";
    o << "runtime.max_v = " << x(r.runtime.max_v) << "\n";
    o << "runtime.min_v = " << x(r.runtime.min_v) << "\n";
    o << "runtime.min_w = " << x(r.runtime.min_w) << "\n";
    o << "runtime.clip_mass = " << x(r.runtime.clip_mass) << "\n";
    o << "runtime.limited_cells = " << r.runtime.limited_cells << "\n";
    const auto& s = r.scenario;
    o << "scenario.t_star = " << (s.t_star ? x(*s.t_star) : "none") << "\n";
    if (s.t_star) {
        o << "scenario.t0 = " << x(*s.t_star + 1.0) << "\n";
        o << "scenario.tau = 1\n";
        o << "scenario.G_at_t_star = " << x(s.G_at_t_star) << "\n";
        o << "scenario.G_monotone_after_t_star = " << (s.G_after_t_star.passed ? "pass" : "fail")
          << " max_increment=" << x(s.G_after_t_star.max_increment) << " slack=" << x(s.monotone_slack)
          << " interval=[" << x(s.G_after_t_star.interval_start) << "," << x(s.G_after_t_star.interval_end) << "]"
          << " intervals=" << s.G_after_t_star.intervals_checked << "\n";
    }
    if (s.time_average) {
        o << "scenario.time_average_t_star = " << x(s.time_average->t_star) << "\n";
        o << "scenario.time_average_min_gradw_l2 = " << x(s.time_average->value_at_t_star) << "\n";
        o << "scenario.time_average_gradw_l2 = " << x(s.time_average->average) << "\n";
    }
    o << "scenario.sup_u = " << x(s.sup_u_all) << "\n";
    if (s.bounded_indicator) {
        o << "scenario.sup_u_1_2 = " << x(*s.sup_u_1_2) << "\n";
        o << "scenario.sup_u_1_end = " << x(*s.sup_u_1_end) << "\n";
        o << "scenario.bounded_indicator = " << (*s.bounded_indicator ? "pass" : "fail") << "\n";
    }
    o << "scenario.entropy_envelope_C = " << x(s.entropy_fit.C) << "\n";
    o << "scenario.entropy_fit = " << x(s.entropy_fit.slope) << " " << x(s.entropy_fit.intercept) << "\n";
    o << "scenario.fisher_cumulative_envelope_C = " << x(s.fisher_fit.C) << "\n";
    o << "scenario.fisher_cumulative_fit = " << x(s.fisher_fit.slope) << " " << x(s.fisher_fit.intercept) << "\n";
    return o.str();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    RunResult res;
    res.dir = cfg.output;
    const fs::path dir = cfg.output;
    const fs::path marker_path = dir / "resume.marker";
    const fs::path config_path = dir / "config.toml";
    const fs::path diag_path = dir / "diagnostics.csv";
    const fs::path samples_path = dir / "audit_samples.csv";
    const std::string config_text = write_config(cfg);

    InitialCondition ic = make_initial_condition(cfg);
    State s = std::move(ic.state);
    res.params = ic.params;
    const Params& p = res.params;
    const StepOptions so = step_options_of(cfg);
    const double a = cfg.effective_a();
    const double cgn = working_cgn(cfg);
    const double M = working_M(cfg, cgn);

    std::vector<double> snaps;
    for (double ts : cfg.snapshot_times) {
        if (ts <= cfg.t_end) snaps.push_back(ts);
    }
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    const int last_record = cfg.t_end > 0.0 ? static_cast<int>(std::ceil(cfg.t_end / cfg.record_every - 1e-9)) : 0;
    auto record_time = [&](int k) { return k >= last_record ? cfg.t_end : k * cfg.record_every; };

    Marker mk;
    bool resume = false;
    if (!opts.fresh && fs::exists(marker_path)) {
        const Marker old = parse_marker(marker_path);
        if (!old.complete) {
            if (!fs::exists(config_path) || read_text(config_path) != config_text) {
                throw ValidationError(dir.string() +
                                      " holds an unfinished run with a different config; rerun with --fresh");
            }
            mk = old;
            resume = true;
        }
    }

    fs::create_directories(dir / "checkpoint");
    if (!snaps.empty()) fs::create_directories(dir / "snapshots");

    RuntimeBounds& rb = res.runtime;
    if (resume) {
        s.u = read_snapshot(dir / "checkpoint" / "u.cplf");
        s.signal = read_snapshot(dir / "checkpoint" / "signal.cplf");
        if (!(s.u.grid() == grid_of(cfg)) || !(s.signal.grid() == grid_of(cfg))) {
            throw ValidationError("checkpoint grid does not match the config");
        }
        s.t = mk.t;
        rb = mk.runtime;
        fs::resize_file(diag_path, mk.diagnostics_bytes);
        fs::resize_file(samples_path, mk.audit_bytes);
        res.records = read_diagnostics_csv(diag_path.string());
        res.resumed = true;
    } else {
        write_text(config_path, config_text);
        write_text(diag_path, std::string(kDiagnosticsHeader) + "\n");
        write_text(samples_path, std::string(kAuditSampleHeader) + "\n");
        fs::remove(dir / "summary.txt");
        fs::remove(dir / "audit.csv");
        rb.observe(s, p, nullptr);
    }
    write_text(dir / "thresholds.txt",
               format_threshold_report(threshold_boundedness(cfg.initial.mass, p, cgn, M, a)));

    std::ofstream diag(diag_path, std::ios::binary | std::ios::app);
    std::ofstream samples(samples_path, std::ios::binary | std::ios::app);
    if (!diag || !samples) throw ValidationError("cannot open CSV outputs in " + dir.string());

    int records_this_session = 0;
    bool halted = false;

    auto checkpoint = [&](bool complete) {
        diag.flush();
        samples.flush();
        mk.complete = complete;
        mk.t = s.t;
        mk.runtime = rb;
        mk.step = rb.steps;
        mk.diagnostics_bytes = fs::file_size(diag_path);
        mk.audit_bytes = fs::file_size(samples_path);
        write_snapshot(dir / "checkpoint" / "u.cplf.tmp", s.u);
        write_snapshot(dir / "checkpoint" / "signal.cplf.tmp", s.signal);
        fs::rename(dir / "checkpoint" / "u.cplf.tmp", dir / "checkpoint" / "u.cplf");
        fs::rename(dir / "checkpoint" / "signal.cplf.tmp", dir / "checkpoint" / "signal.cplf");
        write_atomically(marker_path, format_marker(mk));
    };

    // Returns false when the halt hook fires.
    auto emit_events = [&]() {
        while (mk.next_snapshot < snaps.size() && snaps[mk.next_snapshot] <= s.t) {
            const std::string tag = snapshot_tag(snaps[mk.next_snapshot]);
            write_snapshot(dir / "snapshots" / ("u_" + tag + ".cplf"), s.u);
            write_snapshot(dir / "snapshots" / ("v_" + tag + ".cplf"), signal_as_v(s, p));
            if (s.formulation == Formulation::transformed) {
                write_snapshot(dir / "snapshots" / ("w_" + tag + ".cplf"), s.signal);
            }
            ++mk.next_snapshot;
        }
        while (mk.next_record <= last_record && record_time(mk.next_record) <= s.t) {
            const DiagnosticsRecord r = record(s, p, a, cfg.eps_u);
            res.records.push_back(r);
            diag << to_csv_row(r) << "\n";
            samples << to_csv_row(audit_sample(s, p)) << "\n";
            ++mk.next_record;
            ++records_this_session;
            if (opts.halt_after_records && records_this_session >= *opts.halt_after_records) {
                diag.flush();
                samples.flush();
                return false;
            }
            if ((mk.next_record - 1) % std::max(1, opts.checkpoint_every) == 0) checkpoint(false);
        }
        return true;
    };

    double next_progress = 0.0;
    try {
        if (!resume) halted = !emit_events();
        while (!halted && mk.next_record <= last_record) {
            double next_event = record_time(mk.next_record);
            if (mk.next_snapshot < snaps.size()) next_event = std::min(next_event, snaps[mk.next_snapshot]);
            const double gap = next_event - s.t;
            double dt = adaptive_dt(s, p, so);
            bool land = false;
            if (dt >= gap) {
                dt = gap;
                land = true;
            } else if (dt > 0.5 * gap) {
                dt = 0.5 * gap;
            }
            auto [next, rep] = step(s, p, dt, so);
            if (land) next.t = next_event;
            s = std::move(next);
            rb.observe(s, p, &rep);
            halted = !emit_events();
            if (opts.progress && cfg.t_end > 0.0 && s.t >= next_progress) {
                std::fprintf(opts.progress, "[%s] t = %.4f / %.4f  steps = %lld  sup u = %.6g\n",
                             dir.string().c_str(), s.t, cfg.t_end, rb.steps, s.u.max());
                next_progress += 0.1 * cfg.t_end;
            }
        }
    } catch (const NumericalError& e) {
        res.status = RunStatus::numerical_failure;
        res.message = e.what();
    }
    diag.close();
    samples.close();
    res.final_state = s;

    if (halted) {
        res.status = RunStatus::halted;
        res.message = "halted by request";
        return res;
    }

    res.invariants = check_record_invariants(res.records, p);
    for (auto& c : check_runtime_invariants(rb, cfg.positivity)) {
        if (cfg.formulation == Formulation::original && c.name == "runtime_w_nonnegative") continue;
        res.invariants.push_back(c);
    }
    res.scenario = analyze_records(res.records, p, cgn, M, a);

    const auto all_samples = read_audit_samples_csv(samples_path.string());
    std::ostringstream audit;
    audit << kAuditHeader << "\n";
    for (const auto& r : inequality_audit(all_samples, p, cfg.eps1, cfg.eps2, cgn)) audit << to_csv_row(r) << "\n";
    write_text(dir / "audit.csv", audit.str());
    write_text(dir / "summary.txt", summary_text(res, cfg));
    if (res.status == RunStatus::completed) checkpoint(true);
    return res;
}

VerifyResult verify_run(const fs::path& dir) {
    const ExperimentConfig cfg = parse_config(dir / "config.toml");
    Params p;
    p.chi = cfg.chi;
    p.beta = cfg.beta;
    p.domain_area = cfg.lx * cfg.ly;
    const auto records = read_diagnostics_csv((dir / "diagnostics.csv").string());
    VerifyResult vr;
    vr.checks = check_record_invariants(records, p);
    const auto summary = read_key_values(dir / "summary.txt");
    for (const auto& c : vr.checks) {
        auto it = summary.find("invariant." + c.name);
        if (it == summary.end()) {
            vr.mismatches.push_back(c.name + ": missing from summary.txt");
            continue;
        }
        const bool summary_pass = it->second.rfind("pass", 0) == 0;
        if (summary_pass != c.passed) {
            vr.mismatches.push_back(c.name + ": summary says " + (summary_pass ? "pass" : "fail") +
                                    ", CSV re-check says " + (c.passed ? "pass" : "fail"));
        }
    }
    return vr;
}

std::vector<SweepCellResult> run_sweep(const SweepSpec& spec, const fs::path& out, int jobs, const RunOptions& opts) {
    const auto cells = expand_sweep(spec);
    std::vector<SweepCellResult> results(cells.size());
    fs::create_directories(out);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        for (std::size_t k = next++; k < cells.size(); k = next++) {
            SweepCellResult& r = results[k];
            r.cfg = cells[k];
            r.name = sweep_cell_name(spec, cells[k]);
            r.cfg.output = (out / r.name).string();
            RunOptions cell_opts = opts;
            cell_opts.progress = nullptr;
            try {
                const RunResult rr = run_experiment(r.cfg, cell_opts);
                r.status = rr.status;
                r.exit_code = exit_code_of(rr);
                r.message = rr.message;
                r.sup_u = rr.scenario.sup_u_all;
                r.t_star = rr.scenario.t_star;
            } catch (const ValidationError& e) {
                r.status = RunStatus::numerical_failure;
                r.exit_code = 2;
                r.message = e.what();
            } catch (const NumericalError& e) {
                r.status = RunStatus::numerical_failure;
                r.exit_code = 3;
                r.message = e.what();
            }
            if (opts.progress) {
                std::lock_guard lock(log_mutex);
                std::fprintf(opts.progress, "[sweep] %s exit=%d\n", r.name.c_str(), r.exit_code);
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ostringstream idx;
    idx << "cell,chi,beta,mass,nx,status,exit_code,sup_u,t_star\n";
    for (const auto& r : results) {
        const char* status = r.status == RunStatus::completed ? "completed"
                             : r.status == RunStatus::halted  ? "halted"
                                                              : "failed";
        idx << r.name << "," << format_exact(r.cfg.chi) << "," << format_exact(r.cfg.beta) << ","
            << format_exact(r.cfg.initial.mass) << "," << r.cfg.nx << "," << status << "," << r.exit_code << ","
            << format_exact(r.sup_u) << "," << (r.t_star ? format_exact(*r.t_star) : "") << "\n";
    }
    write_text(out / "sweep_index.csv", idx.str());
    return results;
}

}  // namespace chemolab
