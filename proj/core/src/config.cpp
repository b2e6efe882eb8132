#include "chemolab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "chemolab/errors.hpp"

namespace chemolab {

std::string format_exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        if (line[k] == '"') quoted = !quoted;
        if (line[k] == '#' && !quoted) return line.substr(0, k);
    }
    return line;
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ValidationError(key + ": expected a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw ValidationError(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& raw) {
    std::string v = trim(raw);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<std::string> items;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
    return out;
}

template <class Enum>
Enum to_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, Enum>> options) {
    std::string allowed;
    for (const auto& [name, value] : options) {
        if (v == name) return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ValidationError(key + ": unknown value '" + v + "' (expected one of " + allowed + ")");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"grid.nx", [](auto& c, auto& k, auto& v) { c.nx = static_cast<int>(to_integer(k, v)); }},
        {"grid.ny", [](auto& c, auto& k, auto& v) { c.ny = static_cast<int>(to_integer(k, v)); }},
        {"grid.lx", [](auto& c, auto& k, auto& v) { c.lx = to_double(k, v); }},
        {"grid.ly", [](auto& c, auto& k, auto& v) { c.ly = to_double(k, v); }},
        {"model.chi", [](auto& c, auto& k, auto& v) { c.chi = to_double(k, v); }},
        {"model.beta", [](auto& c, auto& k, auto& v) { c.beta = to_double(k, v); }},
        {"model.f",
         [](auto& c, auto& k, auto& v) {
             c.f_kind = to_enum<ConsumptionKind>(
                 k, v, {{"power", ConsumptionKind::power}, {"tabulated", ConsumptionKind::tabulated}});
         }},
        {"model.f_table", [](auto& c, auto&, auto& v) { c.f_table = v; }},
        {"initial.preset",
         [](auto& c, auto& k, auto& v) {
             c.initial.preset = to_enum<InitialPreset>(
                 k, v,
                 {{"uniform", InitialPreset::uniform}, {"bump", InitialPreset::bump}, {"bumps", InitialPreset::bumps}});
         }},
        {"initial.mass", [](auto& c, auto& k, auto& v) { c.initial.mass = to_double(k, v); }},
        {"initial.center_x", [](auto& c, auto& k, auto& v) { c.initial.center_x = to_double(k, v); }},
        {"initial.center_y", [](auto& c, auto& k, auto& v) { c.initial.center_y = to_double(k, v); }},
        {"initial.width", [](auto& c, auto& k, auto& v) { c.initial.width = to_double(k, v); }},
        {"initial.bumps", [](auto& c, auto& k, auto& v) { c.initial.bumps = static_cast<int>(to_integer(k, v)); }},
        {"initial.v0_profile",
         [](auto& c, auto& k, auto& v) {
             c.initial.v0_profile =
                 to_enum<V0Profile>(k, v, {{"constant", V0Profile::constant}, {"smooth", V0Profile::smooth}});
         }},
        {"initial.v0_max", [](auto& c, auto& k, auto& v) { c.initial.v0_max = to_double(k, v); }},
        {"initial.v0_amplitude", [](auto& c, auto& k, auto& v) { c.initial.v0_amplitude = to_double(k, v); }},
        {"run.formulation",
         [](auto& c, auto& k, auto& v) {
             c.formulation = to_enum<Formulation>(
                 k, v, {{"transformed", Formulation::transformed}, {"original", Formulation::original}});
         }},
        {"run.t_end", [](auto& c, auto& k, auto& v) { c.t_end = to_double(k, v); }},
        {"run.dt_max", [](auto& c, auto& k, auto& v) { c.dt_max = to_double(k, v); }},
        {"run.record_every", [](auto& c, auto& k, auto& v) { c.record_every = to_double(k, v); }},
        {"run.snapshot_times", [](auto& c, auto& k, auto& v) { c.snapshot_times = to_double_list(k, v); }},
        {"run.safety", [](auto& c, auto& k, auto& v) { c.safety = to_double(k, v); }},
        {"run.face_scheme",
         [](auto& c, auto& k, auto& v) {
             c.face_scheme =
                 to_enum<FaceScheme>(k, v, {{"central", FaceScheme::central}, {"upwind", FaceScheme::upwind}});
         }},
        {"run.positivity",
         [](auto& c, auto& k, auto& v) {
             c.positivity = to_enum<PositivityMode>(
                 k, v,
                 {{"limiter", PositivityMode::limiter}, {"clip", PositivityMode::clip}, {"none", PositivityMode::none}});
         }},
        {"run.v_decay",
         [](auto& c, auto& k, auto& v) {
             c.v_decay = to_enum<DecayMode>(
                 k, v, {{"exponential", DecayMode::exponential}, {"explicit", DecayMode::explicit_euler}});
         }},
        {"run.cg_rtol", [](auto& c, auto& k, auto& v) { c.cg_rtol = to_double(k, v); }},
        {"run.seed",
         [](auto& c, auto& k, auto& v) {
             std::size_t used = 0;
             try {
                 if (v.empty() || v[0] == '-' || v[0] == '+') throw std::invalid_argument(v);
                 c.seed = std::stoull(v, &used);
             } catch (const std::exception&) {
                 used = 0;
             }
             if (used == 0 || used != v.size()) {
                 throw ValidationError(k + ": expected a nonnegative integer, got '" + v + "'");
             }
         }},
        {"run.output", [](auto& c, auto&, auto& v) { c.output = v; }},
        {"diagnostics.a", [](auto& c, auto& k, auto& v) { c.a = to_double(k, v); }},
        {"diagnostics.eps1", [](auto& c, auto& k, auto& v) { c.eps1 = to_double(k, v); }},
        {"diagnostics.eps2", [](auto& c, auto& k, auto& v) { c.eps2 = to_double(k, v); }},
        {"diagnostics.cgn",
         [](auto& c, auto& k, auto& v) {
             if (v == "probe") {
                 c.cgn.reset();
             } else {
                 c.cgn = to_double(k, v);
             }
         }},
        {"diagnostics.cgn_safety", [](auto& c, auto& k, auto& v) { c.cgn_safety = to_double(k, v); }},
        {"diagnostics.probe_samples",
         [](auto& c, auto& k, auto& v) { c.probe_samples = static_cast<int>(to_integer(k, v)); }},
        {"diagnostics.M", [](auto& c, auto& k, auto& v) { c.M = to_double(k, v); }},
        {"diagnostics.eps_u", [](auto& c, auto& k, auto& v) { c.eps_u = to_double(k, v); }},
    };
    return table;
}

struct Entry {
    std::string value;
    int line = 0;
};

std::map<std::string, Entry> tokenize(const std::string& text) {
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ValidationError("malformed section header on line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("expected 'key = value' on line " + std::to_string(lineno) + ": " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        if (entries.count(full)) throw ValidationError(full + ": duplicate key on line " + std::to_string(lineno));
        entries[full] = Entry{unquote(trim(line.substr(eq + 1))), lineno};
    }
    return entries;
}

void require_range(bool ok, const std::string& key, const std::string& constraint, double got) {
    if (!ok) throw ValidationError(key + ": must be " + constraint + ", got " + format_exact(got));
}

void validate_config(const ExperimentConfig& c, std::vector<std::string>* warnings) {
    require_range(c.nx >= 3, "grid.nx", ">= 3", c.nx);
    require_range(c.ny >= 3, "grid.ny", ">= 3", c.ny);
    require_range(c.lx > 0.0 && std::isfinite(c.lx), "grid.lx", "positive", c.lx);
    require_range(c.ly > 0.0 && std::isfinite(c.ly), "grid.ly", "positive", c.ly);
    require_range(c.chi > 0.0 && c.chi < 1.0, "model.chi", "in (0,1)", c.chi);
    require_range(c.beta > 0.0 && c.beta < 1.0, "model.beta", "in (0,1)", c.beta);
    if (c.f_kind == ConsumptionKind::tabulated && c.f_table.empty()) {
        throw ValidationError("model.f_table: required when model.f = tabulated");
    }
    require_range(c.initial.mass > 0.0 && std::isfinite(c.initial.mass), "initial.mass", "positive", c.initial.mass);
    require_range(c.initial.width > 0.0, "initial.width", "positive", c.initial.width);
    require_range(c.initial.center_x >= 0.0 && c.initial.center_x <= 1.0, "initial.center_x", "in [0,1]",
                  c.initial.center_x);
    require_range(c.initial.center_y >= 0.0 && c.initial.center_y <= 1.0, "initial.center_y", "in [0,1]",
                  c.initial.center_y);
    require_range(c.initial.bumps >= 1, "initial.bumps", ">= 1", c.initial.bumps);
    require_range(c.initial.v0_max > 0.0, "initial.v0_max", "positive", c.initial.v0_max);
    require_range(c.initial.v0_amplitude >= 0.0, "initial.v0_amplitude", "nonnegative", c.initial.v0_amplitude);
    require_range(c.t_end >= 0.0 && std::isfinite(c.t_end), "run.t_end", "nonnegative", c.t_end);
    require_range(c.dt_max > 0.0, "run.dt_max", "positive", c.dt_max);
    require_range(c.record_every > 0.0, "run.record_every", "positive", c.record_every);
    for (double s : c.snapshot_times) require_range(s >= 0.0, "run.snapshot_times", "nonnegative", s);
    require_range(c.safety > 0.0, "run.safety", "positive", c.safety);
    require_range(c.cg_rtol > 0.0 && c.cg_rtol < 1.0, "run.cg_rtol", "in (0,1)", c.cg_rtol);
    if (c.a) {
        require_range(*c.a > 0.0, "diagnostics.a", "positive", *c.a);
        const AWindow win = a_window(c.chi);
        if (warnings && !(*c.a > win.minus && *c.a < win.plus)) {
            warnings->push_back("diagnostics.a = " + format_exact(*c.a) + " lies outside the admissible window (" +
                                format_exact(win.minus) + ", " + format_exact(win.plus) +
                                "); c0 is not positive (user override accepted)");
        }
    }
    require_range(c.eps1 > 0.0, "diagnostics.eps1", "positive", c.eps1);
    require_range(c.eps2 > 0.0, "diagnostics.eps2", "positive", c.eps2);
    if (c.cgn) require_range(*c.cgn > 0.0, "diagnostics.cgn", "positive or 'probe'", *c.cgn);
    require_range(c.cgn_safety > 0.0, "diagnostics.cgn_safety", "positive", c.cgn_safety);
    require_range(c.probe_samples >= 1, "diagnostics.probe_samples", ">= 1", c.probe_samples);
    if (c.M) require_range(*c.M > 0.0, "diagnostics.M", "positive", *c.M);
    require_range(c.eps_u >= 0.0, "diagnostics.eps_u", "nonnegative", c.eps_u);
}

const std::vector<std::string> kRequired = {"grid.nx", "grid.ny", "model.chi", "model.beta", "initial.mass",
                                            "run.t_end"};

ExperimentConfig build_config(const std::map<std::string, Entry>& entries, std::vector<std::string>* warnings) {
    ExperimentConfig cfg;
    for (const auto& key : kRequired) {
        if (!entries.count(key)) throw ValidationError(key + ": missing required key");
    }
    for (const auto& [key, entry] : entries) {
        auto it = setters().find(key);
        if (it == setters().end()) {
            throw ValidationError(key + ": unknown key (line " + std::to_string(entry.line) + ")");
        }
        it->second(cfg, key, entry.value);
    }
    validate_config(cfg, warnings);
    return cfg;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, std::vector<std::string>* warnings) {
    return build_config(tokenize(text), warnings);
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    return parse_config_text(read_file(path), warnings);
}

SweepSpec parse_sweep_text(const std::string& text) {
    auto entries = tokenize(text);
    SweepSpec spec;
    for (auto it = entries.begin(); it != entries.end();) {
        if (it->first.rfind("sweep.", 0) != 0) {
            ++it;
            continue;
        }
        const std::string axis = it->first.substr(6);
        const std::string& value = it->second.value;
        if (axis == "chi") {
            spec.chi = to_double_list(it->first, value);
        } else if (axis == "beta") {
            spec.beta = to_double_list(it->first, value);
        } else if (axis == "mass") {
            spec.mass = to_double_list(it->first, value);
        } else if (axis == "nx") {
            for (const auto& item : split_list(value)) spec.nx.push_back(static_cast<int>(to_integer(it->first, item)));
        } else {
            throw ValidationError(it->first + ": unknown sweep axis (chi, beta, mass, nx)");
        }
        it = entries.erase(it);
    }
    if (spec.chi.empty() && spec.beta.empty() && spec.mass.empty() && spec.nx.empty()) {
        throw ValidationError("sweep: at least one nonempty axis is required in [sweep]");
    }
    spec.base = build_config(entries, nullptr);
    // every cell must pass validation on its own
    for (const auto& cell : expand_sweep(spec)) validate_config(cell, nullptr);
    return spec;
}

SweepSpec parse_sweep(const std::filesystem::path& path) { return parse_sweep_text(read_file(path)); }

std::string write_config(const ExperimentConfig& c) {
    std::ostringstream o;
    auto q = [](const std::string& s) { return "\"" + s + "\""; };
    auto x = format_exact;
    o << "[grid]\n";
    o << "nx = " << c.nx << "\nny = " << c.ny << "\nlx = " << x(c.lx) << "\nly = " << x(c.ly) << "\n\n";
    o << "[model]\n";
    o << "chi = " << x(c.chi) << "\nbeta = " << x(c.beta) << "\n";
    o << "f = " << (c.f_kind == ConsumptionKind::power ? "power" : "tabulated") << "\n";
    o << "f_table = " << q(c.f_table) << "\n\n";
    o << "[initial]\n";
    const char* preset = c.initial.preset == InitialPreset::uniform ? "uniform"
                         : c.initial.preset == InitialPreset::bump  ? "bump"
                                                                    : "bumps";
    o << "preset = " << preset << "\nmass = " << x(c.initial.mass) << "\ncenter_x = " << x(c.initial.center_x)
      << "\ncenter_y = " << x(c.initial.center_y) << "\nwidth = " << x(c.initial.width)
      << "\nbumps = " << c.initial.bumps << "\n";
    o << "v0_profile = " << (c.initial.v0_profile == V0Profile::constant ? "constant" : "smooth") << "\n";
    o << "v0_max = " << x(c.initial.v0_max) << "\nv0_amplitude = " << x(c.initial.v0_amplitude) << "\n\n";
    o << "[run]\n";
    o << "formulation = " << (c.formulation == Formulation::transformed ? "transformed" : "original") << "\n";
    o << "t_end = " << x(c.t_end) << "\ndt_max = " << x(c.dt_max) << "\nrecord_every = " << x(c.record_every) << "\n";
    o << "snapshot_times = [";
    for (std::size_t k = 0; k < c.snapshot_times.size(); ++k) o << (k ? ", " : "") << x(c.snapshot_times[k]);
    o << "]\n";
    o << "safety = " << x(c.safety) << "\n";
    o << "face_scheme = " << (c.face_scheme == FaceScheme::central ? "central" : "upwind") << "\n";
    const char* pos = c.positivity == PositivityMode::limiter ? "limiter"
                      : c.positivity == PositivityMode::clip  ? "clip"
                                                              : "none";
    o << "positivity = " << pos << "\n";
    o << "v_decay = " << (c.v_decay == DecayMode::exponential ? "exponential" : "explicit") << "\n";
    o << "cg_rtol = " << x(c.cg_rtol) << "\nseed = " << c.seed << "\noutput = " << q(c.output) << "\n\n";
    o << "[diagnostics]\n";
    if (c.a) o << "a = " << x(*c.a) << "\n";
    o << "eps1 = " << x(c.eps1) << "\neps2 = " << x(c.eps2) << "\n";
    o << "cgn = " << (c.cgn ? x(*c.cgn) : std::string("probe")) << "\n";
    o << "cgn_safety = " << x(c.cgn_safety) << "\nprobe_samples = " << c.probe_samples << "\n";
    if (c.M) o << "M = " << x(*c.M) << "\n";
    o << "eps_u = " << x(c.eps_u) << "\n";
    return o.str();
}

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec) {
    const auto chis = spec.chi.empty() ? std::vector<double>{spec.base.chi} : spec.chi;
    const auto betas = spec.beta.empty() ? std::vector<double>{spec.base.beta} : spec.beta;
    const auto masses = spec.mass.empty() ? std::vector<double>{spec.base.initial.mass} : spec.mass;
    const auto nxs = spec.nx.empty() ? std::vector<int>{spec.base.nx} : spec.nx;
    std::vector<ExperimentConfig> cells;
    for (double chi : chis) {
        for (double beta : betas) {
            for (double mass : masses) {
                for (int nx : nxs) {
                    ExperimentConfig c = spec.base;
                    c.chi = chi;
                    c.beta = beta;
                    c.initial.mass = mass;
                    if (!spec.nx.empty()) {
                        // keep the aspect ratio of the template grid
                        c.ny = std::max(3, static_cast<int>(std::lround(static_cast<double>(spec.base.ny) * nx /
                                                                        spec.base.nx)));
                        c.nx = nx;
                    }
                    cells.push_back(std::move(c));
                }
            }
        }
    }
    return cells;
}

std::string sweep_cell_name(const SweepSpec& spec, const ExperimentConfig& cell) {
    std::string name;
    auto add = [&name](const char* axis, const std::string& value) {
        if (!name.empty()) name += '_';
        name += axis;
        name += '-';
        name += value;
    };
    if (!spec.chi.empty()) add("chi", format_exact(cell.chi));
    if (!spec.beta.empty()) add("beta", format_exact(cell.beta));
    if (!spec.mass.empty()) add("mass", format_exact(cell.initial.mass));
    if (!spec.nx.empty()) add("nx", std::to_string(cell.nx));
    return name;
}

Grid grid_of(const ExperimentConfig& cfg) { return build_grid(cfg.nx, cfg.ny, cfg.lx, cfg.ly); }

Params params_of(const ExperimentConfig& cfg, double v0_max) {
    Params p;
    p.chi = cfg.chi;
    p.beta = cfg.beta;
    p.f_kind = cfg.f_kind;
    if (cfg.f_kind == ConsumptionKind::tabulated) {
        p.f_table = std::make_shared<const TabulatedConsumption>(TabulatedConsumption::load_csv(cfg.f_table, cfg.beta));
    }
    p.v0_max = v0_max;
    p.domain_area = cfg.lx * cfg.ly;
    validate(p);
    return p;
}

StepOptions step_options_of(const ExperimentConfig& cfg) {
    StepOptions o;
    o.face_scheme = cfg.face_scheme;
    o.positivity = cfg.positivity;
    o.v_decay = cfg.v_decay;
    o.safety = cfg.safety;
    o.dt_max = cfg.dt_max;
    o.cg.rtol = cfg.cg_rtol;
    return o;
}

}  // namespace chemolab
