// vdimer - command-line driver: oracle curves, pump-probe runs, witness protocol, r sweeps, validation
#include "vdimer/config.hpp"
#include "vdimer/csv_io.hpp"
#include "vdimer/errors.hpp"
#include "vdimer/process.hpp"
#include "vdimer/protocol.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vdimer;

namespace {

struct Overrides {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
    std::optional<int> n_phon;
    std::optional<double> t_max, t_step, sigma_t, dt, T1, T2, tau;
    std::optional<std::size_t> n_orient;
    std::string label;
    std::string input;
    bool verbose{false};
};

RunConfig resolve(const Overrides& o) {
    RunConfig c = o.config.empty() ? parse_config(json::object()) : load_config(o.config);
    if (!o.preset.empty()) {
        if (o.preset != "apc") throw ConfigError("--preset: only \"apc\" is available");
        c.preset = "apc";
        c.dimer = apc_preset();
    }
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (!o.out.empty()) c.output = o.out;
    if (o.n_phon) c.n_phon = *o.n_phon;
    if (o.t_max) c.t_max_fs = *o.t_max;
    if (o.t_step) c.t_step_fs = *o.t_step;
    if (o.sigma_t) c.sigma_t_fs = *o.sigma_t;
    if (o.dt) c.dt_fs = *o.dt;
    if (o.T1) c.T1_fs = *o.T1;
    if (o.T2) c.T2_fs = *o.T2;
    if (o.tau) c.tau_fs = *o.tau;
    if (o.n_orient) c.n_orientations = *o.n_orient;
    if (!o.label.empty()) c.pair_label = o.label;
    if (o.verbose) c.verbose = true;
    // overrides go through the same schema checks
    return parse_config(to_json(c));
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<double> time_grid(double t_max, double step) {
    DelayGrid g{0.0, t_max, step};
    return g.values();
}

void write_spectrum(const fs::path& path, const ExcitonStructure& s) {
    std::ofstream out(path);
    out << "index,energy_cm,manifold,alpha_weight\n";
    const char* names[] = {"ground", "alpha", "beta", "biexciton"};
    for (Eigen::Index k = 0; k < s.energies.size(); ++k) {
        out << k << ',' << format17(to_wavenumber({s.energies(k)}).cm) << ','
            << names[static_cast<int>(s.manifold[static_cast<std::size_t>(k)])] << ','
            << format17(s.alpha_weight(k)) << '\n';
    }
}

int cmd_chi_theory(const RunConfig& c) {
    const auto s = make_structure(c.dimer, c.n_phon);
    const ChiOracle oracle(s, c.measure);
    std::vector<ChiStats> rows;
    for (double t : time_grid(c.t_max_fs, c.t_step_fs)) {
        const ReducedChi r = oracle.at(t);
        if (c.measure == BranchMeasure::electronic &&
            (std::abs(r.aaaa() + r.bbaa() - 1.0) > 1e-6 || std::abs(r.aabb() + r.bbbb() - 1.0) > 1e-6)) {
            throw NumericalError("chi-theory: trace preservation violated at t = " + format17(t));
        }
        rows.push_back({t, r.v, Eigen::Vector4d::Zero(), 0.0});
    }
    write_chi_curve(c.output / "chi_curve.csv", rows);
    write_spectrum(c.output / "spectrum.csv", s);
    std::printf("chi-theory: %zu rows -> %s\n", rows.size(), (c.output / "chi_curve.csv").c_str());
    return 0;
}

int cmd_pump_probe(const RunConfig& c) {
    const Experiment exp(c.protocol_settings());
    const PairLabel lab = PairLabel::parse(c.pair_label);
    const Eigen::Matrix3d R = random_rotation(c.seed, 0);
    const PulsePair pp0 = exp.make_pair(lab, c.tau_fs, R, 0.0);
    const PulsePair ppi = exp.make_pair(lab, c.tau_fs, R, std::numbers::pi);
    if (c.require_isolated) pp0.validate(true);
    const PropagationPlan plan = exp.plan_for(pp0.probe.t_center_fs + 5.0 * c.sigma_t_fs);
    const std::array<Pulse, 1> probe{pp0.probe}, pump{pp0.pump};
    const SignalRecord avg = phase_average(simulate_pair(pp0, exp.structure(), plan),
                                           simulate_pair(ppi, exp.structure(), plan));
    const SignalRecord sig = pump_only_subtract(probe_only_subtract(avg, simulate(exp.structure(), probe, plan)),
                                                simulate(exp.structure(), pump, plan));
    {
        std::ofstream out(c.output / "signal.csv");
        out << "t_fs,flux_absorption,flux_emission\n";
        for (std::size_t k = 0; k < sig.t.size(); ++k) {
            out << format17(sig.t[k]) << ',' << format17(sig.flux_absorption[k]) << ','
                << format17(sig.flux_emission[k]) << '\n';
        }
    }
    const ChiOracle oracle(exp.structure());
    const SignalParts pert = perturbative_signal(pp0, exp.structure(), oracle.at(c.tau_fs));
    write_json(c.output / "summary.json", {{"label", lab.str()},
                                           {"tau_fs", c.tau_fs},
                                           {"S", sig.S},
                                           {"S_perturbative", pert.total()},
                                           {"esa", pert.esa},
                                           {"se", pert.se},
                                           {"gsb", pert.gsb},
                                           {"eta", exp.eta()},
                                           {"dt_fs", exp.dt()}});
    std::printf("pump-probe %s tau=%g fs: S = %.6e (perturbative %.6e)\n", lab.str().c_str(), c.tau_fs, sig.S,
                pert.total());
    return 0;
}

int cmd_protocol(const RunConfig& c) {
    const Experiment exp(c.protocol_settings());
    const WitnessReport rep = run_witness_protocol(exp, c.T1_fs, c.T2_fs, c.n_orientations, c.seed);
    write_chi_curve(c.output / "chi_curve.csv", rep.sim_chi);
    const std::array<WitnessRow, 1> w{{{c.T1_fs, c.T2_fs, rep.sim.value, rep.theory.value}}};
    write_witness(c.output / "witness.csv", w);
    const std::array<ConditioningRow, 1> cond{{{"ensemble_magic_angle", rep.ensemble.system.kappa,
                                                rep.ensemble.system.det}}};
    write_conditioning(c.output / "conditioning.csv", cond);
    json theory = json::array();
    for (const auto& t : rep.theory_chi) theory.push_back({t.tau, t.aaaa(), t.aabb(), t.bbaa(), t.bbbb()});
    write_json(c.output / "summary.json", {{"wb_sim", rep.sim.value},
                                           {"wb_sim_signed", rep.sim.signed_value},
                                           {"wb_theory", rep.theory.value},
                                           {"wb_theory_signed", rep.theory.signed_value},
                                           {"kappa", rep.ensemble.system.kappa},
                                           {"experiments_per_orientation", rep.experiments_per_orientation},
                                           {"N", rep.ensemble.N},
                                           {"seed", rep.ensemble.seed},
                                           {"theory_chi", theory}});
    std::printf("protocol T1=%g T2=%g: W_sim = %.6e, W_theory = %.6e, kappa = %.3e\n", c.T1_fs, c.T2_fs,
                rep.sim.value, rep.theory.value, rep.ensemble.system.kappa);
    return 0;
}

int cmd_witness(const RunConfig& c, const std::string& input) {
    if (input.empty()) throw ConfigError("witness: --input <chi_curve.csv> is required");
    const auto rows = read_chi_curve(input);
    if (rows.size() < 2) throw ConfigError("witness: need at least two delays");
    const double h = rows[1].tau - rows[0].tau;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (std::abs(rows[k].tau - (rows[0].tau + static_cast<double>(k) * h)) > 1e-9 * std::max(1.0, rows[k].tau)) {
            throw ConfigError("witness: delays must form a uniform grid");
        }
    }
    if (std::abs(rows[0].tau) > 1e-12) throw ConfigError("witness: grid must start at 0");
    const double kT2 = std::round(c.T2_fs / h);
    if (std::abs(kT2 * h - c.T2_fs) > 1e-9 * std::max(1.0, c.T2_fs)) throw ConfigError("witness: T2 not on grid");
    const auto j2 = static_cast<std::size_t>(kT2);
    const ChiOracle oracle(make_structure(c.dimer, c.n_phon));
    std::vector<WitnessRow> out;
    auto chi = [&](std::size_t k) { return ReducedChi{rows[k].tau, rows[k].mean}; };
    for (std::size_t i = 0; i + j2 < rows.size(); ++i) {
        const WitnessPoint sim = witness_wb(chi(i), chi(j2), chi(i + j2));
        const WitnessPoint th = witness_wb(oracle.at(rows[i].tau), oracle.at(rows[j2].tau),
                                           oracle.at(rows[i].tau + rows[j2].tau));
        out.push_back({rows[i].tau, rows[j2].tau, sim.value, th.value});
    }
    write_witness(c.output / "witness.csv", out);
    std::printf("witness: %zu rows -> %s\n", out.size(), (c.output / "witness.csv").c_str());
    return 0;
}

int cmd_r_sweep(const RunConfig& c) {
    const auto taus = c.rsweep_grid.values();
    const auto pts = r_sweep(c.protocol_settings(), c.J_values_cm, taus, c.rsweep_orientations, c.seed);
    write_rsweep(c.output / "rsweep.csv", pts);
    for (const auto& p : pts) std::printf("J = %8.2f cm^-1  r = %.4f  sigma = %.6e\n", p.J, p.r, p.sigma);
    return 0;
}

int cmd_validate(const RunConfig& c) {
    json checks = json::array();
    bool ok = true;
    auto record = [&](const std::string& name, bool pass, double value) {
        checks.push_back({{"check", name}, {"pass", pass}, {"value", value}});
        std::printf("%-34s %s  (%.3e)\n", name.c_str(), pass ? "PASS" : "FAIL", value);
        ok = ok && pass;
    };

    const auto h = assemble(c.dimer, build_space(c.n_phon));
    const Eigen::MatrixXcd U = exact_propagator(h.total(), 1000.0);
    const double unit = (U * U.adjoint() - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
    record("unitarity", unit < 1e-10, unit);

    const ChiOracle oracle(exciton_structure(h, c.dimer));
    double worst = 0.0;
    for (double t : time_grid(1000.0, 5.0)) {
        const ReducedChi r = oracle.at(t);
        worst = std::max({worst, std::abs(r.aaaa() + r.bbaa() - 1.0), std::abs(r.aabb() + r.bbbb() - 1.0)});
    }
    record("trace_preservation", worst < 1e-6, worst);

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double wmax = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double a1 = u(rng), b1 = u(rng), a2 = u(rng), b2 = u(rng);
        const ReducedChi A{1.0, {a1, 1.0 - b1, 1.0 - a1, b1}};
        const ReducedChi B{2.0, {a2, 1.0 - b2, 1.0 - a2, b2}};
        Eigen::Vector4d BA;
        BA << a2 * a1 + (1.0 - b2) * (1.0 - a1), a2 * (1.0 - b1) + (1.0 - b2) * b1,
            (1.0 - a2) * a1 + b2 * (1.0 - a1), (1.0 - a2) * (1.0 - b1) + b2 * b1;
        wmax = std::max(wmax, witness_wb(A, B, ReducedChi{3.0, BA}).value);
    }
    record("semigroup_zero", wmax < 1e-12, wmax);

    // purely electronic dimer, polarization-selective pulses
    RunConfig el = c;
    el.n_phon = 0;
    const Experiment exp(el.protocol_settings());
    const InversionSystem sys = build_inversion(polarization_selective_pairs(exp, 1500.0), exp.structure());
    record("selective_singularity", sys.relative_det() < 1e-12 && sys.kappa >= 1e6, sys.relative_det());

    write_json(c.output / "validate.json", {{"checks", checks}, {"pass", ok}});
    if (!ok) throw NumericalError("validate: at least one invariant failed");
    return 0;
}

void error_record(const char* kind, const std::string& msg, int code, const fs::path& out) {
    const json rec = {{"error", {{"kind", kind}, {"message", msg}, {"exit_code", code}}}};
    std::cerr << rec.dump() << '\n';
    std::error_code ec;
    if (!out.empty() && fs::is_directory(out, ec)) {
        std::ofstream f(out / "error.json");
        f << rec.dump(2) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vibronic dimer pump-probe coherence witness"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config, "JSON run configuration");
    app.add_option("--preset", o.preset, "parameter preset (apc)");
    app.add_option("--seed", o.seed, "orientation RNG seed");
    app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--n-phon", o.n_phon, "phonons per site");
    app.add_option("--t-max", o.t_max, "chi-theory: last time (fs)");
    app.add_option("--t-step", o.t_step, "chi-theory: time step (fs)");
    app.add_option("--sigma-t", o.sigma_t, "pulse temporal width (fs)");
    app.add_option("--dt", o.dt, "integrator step (fs), 0 = automatic");
    app.add_option("--T1", o.T1, "first witness interval (fs)");
    app.add_option("--T2", o.T2, "second witness interval (fs)");
    app.add_option("--tau", o.tau, "pump-probe delay (fs)");
    app.add_option("--n-orientations", o.n_orient, "orientation samples");
    app.add_option("--label", o.label, "pump-probe pair, probe then pump, e.g. +-");
    app.add_flag("--verbose", o.verbose, "one log line per simulated pair");

    auto* chi = app.add_subcommand("chi-theory", "oracle process-tensor curves");
    auto* pp = app.add_subcommand("pump-probe", "one pulse pair, phase averaged and subtracted");
    auto* proto = app.add_subcommand("protocol", "12-experiment witness run");
    auto* wit = app.add_subcommand("witness", "W^b from an existing chi_curve.csv");
    wit->add_option("--input", o.input, "chi_curve.csv to read");
    auto* rs = app.add_subcommand("r-sweep", "deviation sigma against r");
    auto* val = app.add_subcommand("validate", "invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        error_record("usage", e.what(), 2, {});
        return 2;
    }

    fs::path out;
    try {
        const RunConfig c = resolve(o);
        out = c.output;
        fs::create_directories(c.output);
        write_json(c.output / "config.json", to_json(c));
        if (chi->parsed()) return cmd_chi_theory(c);
        if (pp->parsed()) return cmd_pump_probe(c);
        if (proto->parsed()) return cmd_protocol(c);
        if (wit->parsed()) return cmd_witness(c, o.input);
        if (rs->parsed()) return cmd_r_sweep(c);
        if (val->parsed()) return cmd_validate(c);
    } catch (const ConfigError& e) {
        error_record("schema", e.what(), 2, out);
        return 2;
    } catch (const NumericalError& e) {
        error_record("numerical", e.what(), 3, out);
        return 3;
    } catch (const DomainError& e) {
        error_record("domain", e.what(), 2, out);
        return 2;
    } catch (const std::exception& e) {
        error_record("runtime", e.what(), 1, out);
        return 1;
    }
    return 0;
}
