#include "vdimer/config.hpp"
#include "vdimer/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace vdimer {

using nlohmann::json;

std::vector<double> DelayGrid::values() const {
    if (!(step_fs > 0.0) || stop_fs < start_fs || start_fs < 0.0) {
        throw ConfigError("delay grid needs 0 <= start <= stop and step > 0");
    }
    std::vector<double> v;
    const auto n = static_cast<std::size_t>(std::floor((stop_fs - start_fs) / step_fs + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) v.push_back(start_fs + static_cast<double>(k) * step_fs);
    return v;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

Vec3 read_vec(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected a 3-vector");
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
        if (!j[static_cast<std::size_t>(k)].is_number()) throw ConfigError(where + ": expected numbers");
        v(k) = j[static_cast<std::size_t>(k)].get<double>();
    }
    return v;
}

DelayGrid read_grid(const json& j, DelayGrid g, const std::string& where) {
    check_keys(j, {"start_fs", "stop_fs", "step_fs"}, where);
    read(j, "start_fs", g.start_fs, where);
    read(j, "stop_fs", g.stop_fs, where);
    read(j, "step_fs", g.step_fs, where);
    g.values();
    return g;
}

json grid_json(const DelayGrid& g) {
    return {{"start_fs", g.start_fs}, {"stop_fs", g.stop_fs}, {"step_fs", g.step_fs}};
}

}  // namespace

ProtocolSettings RunConfig::protocol_settings() const {
    ProtocolSettings s;
    s.params = dimer;
    s.n_phon = n_phon;
    s.pulses.sigma_fs = sigma_t_fs;
    s.pulses.depletion = depletion;
    if (eta_cm) s.pulses.eta = internal(*eta_cm);
    s.pulses.auto_resonant = auto_resonant;
    s.pulses.omega_plus_cm = omega_plus_cm;
    s.pulses.omega_minus_cm = omega_minus_cm;
    s.plan.dt_fs = dt_fs;
    s.plan.frame = frame;
    s.plan.rwa = rwa;
    s.kappa_max = kappa_max;
    s.require_isolated = require_isolated;
    s.threads = threads;
    s.bootstrap = bootstrap;
    s.verbose = verbose;
    return s;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    check_keys(j, {"preset", "dimer", "n_phon", "pulse", "plan", "protocol", "chi_theory", "pump_probe", "r_sweep",
                   "output", "threads", "verbose"},
               "config");
    read(j, "preset", c.preset, "config");
    if (c.preset == "apc") {
        c.dimer = apc_preset();
    } else if (c.preset == "none") {
        c.dimer = DimerParams{};
    } else {
        throw ConfigError("config.preset: expected \"apc\" or \"none\"");
    }
    if (j.contains("dimer")) {
        const json& d = j.at("dimer");
        const std::string w = "config.dimer";
        check_keys(d, {"eps_a", "eps_b", "J", "omega_a", "omega_b", "g_a", "g_b", "delta_E", "mu_a", "mu_b",
                       "statistics"},
                   w);
        read(d, "eps_a", c.dimer.eps_a, w);
        read(d, "eps_b", c.dimer.eps_b, w);
        read(d, "J", c.dimer.J, w);
        read(d, "omega_a", c.dimer.omega_a, w);
        read(d, "omega_b", c.dimer.omega_b, w);
        read(d, "g_a", c.dimer.g_a, w);
        read(d, "g_b", c.dimer.g_b, w);
        read(d, "delta_E", c.dimer.delta_E, w);
        if (d.contains("mu_a")) c.dimer.mu_a = read_vec(d.at("mu_a"), w + ".mu_a");
        if (d.contains("mu_b")) c.dimer.mu_b = read_vec(d.at("mu_b"), w + ".mu_b");
        std::string stat = c.dimer.statistics == ExcitonStatistics::fermion ? "fermion" : "paulion";
        read(d, "statistics", stat, w);
        if (stat == "fermion") {
            c.dimer.statistics = ExcitonStatistics::fermion;
        } else if (stat == "paulion") {
            c.dimer.statistics = ExcitonStatistics::paulion;
        } else {
            throw ConfigError(w + ".statistics: expected \"fermion\" or \"paulion\"");
        }
    } else if (c.preset == "none") {
        throw ConfigError("config: preset \"none\" requires a dimer block");
    }
    read(j, "n_phon", c.n_phon, "config");

    if (j.contains("pulse")) {
        const json& p = j.at("pulse");
        const std::string w = "config.pulse";
        check_keys(p, {"sigma_t_fs", "depletion", "eta_cm", "auto_resonant", "omega_plus_cm", "omega_minus_cm"}, w);
        read(p, "sigma_t_fs", c.sigma_t_fs, w);
        read(p, "depletion", c.depletion, w);
        if (p.contains("eta_cm") && !p.at("eta_cm").is_null()) {
            double e = 0.0;
            read(p, "eta_cm", e, w);
            c.eta_cm = e;
        }
        read(p, "auto_resonant", c.auto_resonant, w);
        read(p, "omega_plus_cm", c.omega_plus_cm, w);
        read(p, "omega_minus_cm", c.omega_minus_cm, w);
    }
    if (j.contains("plan")) {
        const json& p = j.at("plan");
        const std::string w = "config.plan";
        check_keys(p, {"dt_fs", "frame", "rwa"}, w);
        if (p.contains("dt_fs") && p.at("dt_fs").is_string()) {
            if (p.at("dt_fs").get<std::string>() != "auto") throw ConfigError(w + ".dt_fs: number or \"auto\"");
            c.dt_fs = 0.0;
        } else {
            read(p, "dt_fs", c.dt_fs, w);
        }
        std::string frame = c.frame == Frame::lab ? "lab" : "rotating";
        read(p, "frame", frame, w);
        if (frame == "lab") {
            c.frame = Frame::lab;
        } else if (frame == "rotating") {
            c.frame = Frame::rotating;
        } else {
            throw ConfigError(w + ".frame: expected \"lab\" or \"rotating\"");
        }
        read(p, "rwa", c.rwa, w);
    }
    if (j.contains("protocol")) {
        const json& p = j.at("protocol");
        const std::string w = "config.protocol";
        check_keys(p, {"T1_fs", "T2_fs", "tau_grid", "N_orientations", "seed", "bootstrap", "kappa_max",
                       "require_isolated"},
                   w);
        read(p, "T1_fs", c.T1_fs, w);
        read(p, "T2_fs", c.T2_fs, w);
        if (p.contains("tau_grid")) c.tau_grid = read_grid(p.at("tau_grid"), c.tau_grid, w + ".tau_grid");
        read(p, "N_orientations", c.n_orientations, w);
        read(p, "seed", c.seed, w);
        read(p, "bootstrap", c.bootstrap, w);
        read(p, "kappa_max", c.kappa_max, w);
        read(p, "require_isolated", c.require_isolated, w);
    }
    if (j.contains("chi_theory")) {
        const json& p = j.at("chi_theory");
        const std::string w = "config.chi_theory";
        check_keys(p, {"t_max_fs", "t_step_fs", "measure"}, w);
        read(p, "t_max_fs", c.t_max_fs, w);
        read(p, "t_step_fs", c.t_step_fs, w);
        std::string m = c.measure == BranchMeasure::electronic ? "electronic" : "eigenstate";
        read(p, "measure", m, w);
        if (m == "electronic") {
            c.measure = BranchMeasure::electronic;
        } else if (m == "eigenstate") {
            c.measure = BranchMeasure::eigenstate;
        } else {
            throw ConfigError(w + ".measure: expected \"electronic\" or \"eigenstate\"");
        }
    }
    if (j.contains("pump_probe")) {
        const json& p = j.at("pump_probe");
        const std::string w = "config.pump_probe";
        check_keys(p, {"label", "tau_fs"}, w);
        read(p, "label", c.pair_label, w);
        read(p, "tau_fs", c.tau_fs, w);
    }
    if (j.contains("r_sweep")) {
        const json& p = j.at("r_sweep");
        const std::string w = "config.r_sweep";
        check_keys(p, {"J_values_cm", "tau_grid", "N_orientations"}, w);
        read(p, "J_values_cm", c.J_values_cm, w);
        if (p.contains("tau_grid")) c.rsweep_grid = read_grid(p.at("tau_grid"), c.rsweep_grid, w + ".tau_grid");
        read(p, "N_orientations", c.rsweep_orientations, w);
    }
    std::string out = c.output.string();
    read(j, "output", out, "config");
    c.output = out;
    read(j, "threads", c.threads, "config");
    read(j, "verbose", c.verbose, "config");

    // value checks
    try {
        c.dimer.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (c.n_phon < 0) throw ConfigError("config.n_phon must be >= 0");
    if (!(c.sigma_t_fs > 0.0)) throw ConfigError("config.pulse.sigma_t_fs must be positive");
    if (!(c.depletion > 0.0 && c.depletion <= 0.01)) throw ConfigError("config.pulse.depletion must lie in (0, 0.01]");
    if (c.dt_fs < 0.0) throw ConfigError("config.plan.dt_fs must be positive");
    if (c.n_orientations < 1) throw ConfigError("config.protocol.N_orientations must be >= 1");
    if (!(c.t_step_fs > 0.0) || c.t_max_fs < 0.0) throw ConfigError("config.chi_theory: invalid time grid");
    try {
        PairLabel::parse(c.pair_label);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config.pump_probe.label: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    auto vec = [](const Vec3& v) { return json::array({v(0), v(1), v(2)}); };
    json j;
    j["preset"] = c.preset;
    j["dimer"] = {{"eps_a", c.dimer.eps_a},
                  {"eps_b", c.dimer.eps_b},
                  {"J", c.dimer.J},
                  {"omega_a", c.dimer.omega_a},
                  {"omega_b", c.dimer.omega_b},
                  {"g_a", c.dimer.g_a},
                  {"g_b", c.dimer.g_b},
                  {"delta_E", c.dimer.delta_E},
                  {"mu_a", vec(c.dimer.mu_a)},
                  {"mu_b", vec(c.dimer.mu_b)},
                  {"statistics", c.dimer.statistics == ExcitonStatistics::fermion ? "fermion" : "paulion"}};
    j["n_phon"] = c.n_phon;
    j["pulse"] = {{"sigma_t_fs", c.sigma_t_fs},
                  {"depletion", c.depletion},
                  {"eta_cm", c.eta_cm ? json(*c.eta_cm) : json(nullptr)},
                  {"auto_resonant", c.auto_resonant},
                  {"omega_plus_cm", c.omega_plus_cm},
                  {"omega_minus_cm", c.omega_minus_cm}};
    j["plan"] = {{"dt_fs", c.dt_fs == 0.0 ? json("auto") : json(c.dt_fs)},
                 {"frame", c.frame == Frame::lab ? "lab" : "rotating"},
                 {"rwa", c.rwa}};
    j["protocol"] = {{"T1_fs", c.T1_fs},
                     {"T2_fs", c.T2_fs},
                     {"tau_grid", grid_json(c.tau_grid)},
                     {"N_orientations", c.n_orientations},
                     {"seed", c.seed},
                     {"bootstrap", c.bootstrap},
                     {"kappa_max", c.kappa_max},
                     {"require_isolated", c.require_isolated}};
    j["chi_theory"] = {{"t_max_fs", c.t_max_fs},
                       {"t_step_fs", c.t_step_fs},
                       {"measure", c.measure == BranchMeasure::electronic ? "electronic" : "eigenstate"}};
    j["pump_probe"] = {{"label", c.pair_label}, {"tau_fs", c.tau_fs}};
    j["r_sweep"] = {{"J_values_cm", c.J_values_cm},
                    {"tau_grid", grid_json(c.rsweep_grid)},
                    {"N_orientations", c.rsweep_orientations}};
    j["output"] = c.output.string();
    j["threads"] = c.threads;
    j["verbose"] = c.verbose;
    return j;
}

}  // namespace vdimer
