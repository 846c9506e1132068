#include "vdimer/protocol.hpp"
#include "vdimer/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace vdimer {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(m);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

SignalRecord simulate(const ExcitonStructure& s, std::span<const Pulse> pulses, const PropagationPlan& plan) {
    const Propagator prop(s, pulses, plan);
    const double dt = prop.plan().dt_fs;
    std::vector<Eigen::Index> e_idx, f_idx;
    for (std::size_t k = 0; k < s.manifold.size(); ++k) {
        if (s.manifold[k] == Manifold::alpha || s.manifold[k] == Manifold::beta) {
            e_idx.push_back(static_cast<Eigen::Index>(k));
        }
        if (s.manifold[k] == Manifold::biexciton) f_idx.push_back(static_cast<Eigen::Index>(k));
    }

    SignalRecord rec;
    const std::size_t n = prop.steps() + 1;
    rec.t.reserve(n);
    rec.flux_absorption.reserve(n);
    rec.flux_emission.reserve(n);
    // Excited populations are summed directly; 1 - P_g would lose digits.
    double pe_prev = 0.0, pf_prev = 0.0, pe0 = 0.0, pf0 = 0.0;
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(s.energies.size());
    c(s.g0) = 1.0;
    prop.run(c, [&](std::size_t k, double t, const Eigen::VectorXcd& x) {
        double pe = 0.0, pf = 0.0;
        for (auto i : e_idx) pe += std::norm(x(i));
        for (auto i : f_idx) pf += std::norm(x(i));
        rec.t.push_back(t);
        if (k == 0) {
            rec.flux_absorption.push_back(0.0);
            rec.flux_emission.push_back(0.0);
            pe0 = pe;
            pf0 = pf;
        } else {
            rec.flux_absorption.push_back(((pe + pf) - (pe_prev + pf_prev)) / dt);
            rec.flux_emission.push_back(-(pf - pf_prev) / dt);
        }
        pe_prev = pe;
        pf_prev = pf;
    });
    // N_exc = P_e + 2 P_f, its change is the integral of absorption minus emission flux
    rec.S = (pe_prev - pe0) + 2.0 * (pf_prev - pf0);
    return rec;
}

SignalRecord simulate_pair(const PulsePair& pair, const ExcitonStructure& s, const PropagationPlan& plan,
                           std::uint64_t orientation) {
    if (pair.delay() < 0.0) throw DomainError("simulate_pair: probe must not precede the pump");
    PropagationPlan p = plan;
    p.t_start_fs = pair.pump.t_center_fs - 5.0 * pair.pump.sigma_fs;
    p.t_end_fs = pair.probe.t_center_fs + 5.0 * pair.probe.sigma_fs;
    const std::array<Pulse, 2> pulses{pair.pump, pair.probe};
    SignalRecord r = simulate(s, pulses, p);
    r.label = pair.label;
    r.phase = pair.probe.phase;
    r.orientation = orientation;
    return r;
}

namespace {

void require_same_grid(const SignalRecord& a, const SignalRecord& b, const char* who) {
    if (a.t.size() != b.t.size()) throw DomainError(std::string(who) + ": time grids differ");
    for (std::size_t k = 0; k < a.t.size(); ++k) {
        if (std::abs(a.t[k] - b.t[k]) > 1e-9) throw DomainError(std::string(who) + ": time grids differ");
    }
}

SignalRecord combine(const SignalRecord& a, const SignalRecord& b, double wa, double wb) {
    SignalRecord r = a;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        r.flux_absorption[k] = wa * a.flux_absorption[k] + wb * b.flux_absorption[k];
        r.flux_emission[k] = wa * a.flux_emission[k] + wb * b.flux_emission[k];
    }
    r.S = wa * a.S + wb * b.S;
    return r;
}

}  // namespace

SignalRecord phase_average(const SignalRecord& a, const SignalRecord& b) {
    require_same_grid(a, b, "phase_average");
    return combine(a, b, 0.5, 0.5);
}

SignalRecord probe_only_subtract(const SignalRecord& full, const SignalRecord& probe_only) {
    require_same_grid(full, probe_only, "probe_only_subtract");
    return combine(full, probe_only, 1.0, -1.0);
}

SignalRecord pump_only_subtract(const SignalRecord& full, const SignalRecord& pump_only) {
    require_same_grid(full, pump_only, "pump_only_subtract");
    return combine(full, pump_only, 1.0, -1.0);
}

void InversionSystem::finalize() {
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(M);
    const auto& sv = svd.singularValues();
    kappa = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    det = M.determinant();
}

double InversionSystem::relative_det() const {
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(M);
    const double smax = svd.singularValues()(0);
    if (smax == 0.0) return 0.0;
    return std::abs(det) / std::pow(smax, 4);
}

InversionSystem build_inversion(const std::array<PulsePair, 4>& pairs, const ExcitonStructure& s) {
    InversionSystem sys;
    for (int r = 0; r < 4; ++r) {
        const PulsePair& pr = pairs[static_cast<std::size_t>(r)];
        if (!(pr.label == kPairOrder[static_cast<std::size_t>(r)])) {
            throw DomainError("build_inversion: pairs must follow the (+,+), (+,-), (-,+), (-,-) order");
        }
        const auto P = transition_amplitudes(pr.pump, s);
        const auto Q = transition_amplitudes(pr.probe, s);
        for (int q = 0; q < 2; ++q) {
            for (int p = 0; p < 2; ++p) {
                const double pump = std::norm(P.ground[p]);
                sys.M(r, 2 * q + p) = pump * (std::norm(Q.biex[q]) - std::norm(Q.ground[q]));
                sys.G(r) += std::norm(Q.ground[q]) * pump;
            }
        }
    }
    sys.finalize();
    return sys;
}

Recovery recover_chi(const Eigen::Vector4d& S, const InversionSystem& sys, double kappa_max, double tau) {
    if (!(sys.kappa <= kappa_max)) {
        throw IllConditionedError("recover_chi: condition number " + std::to_string(sys.kappa) +
                                      " exceeds the threshold",
                                  sys.kappa);
    }
    const Eigen::Vector4d rhs = S + sys.G;
    const Eigen::Vector4d x = sys.M.fullPivLu().solve(rhs);
    Recovery out;
    out.chi.tau = tau;
    out.chi.v = x;
    out.residual = (sys.M * x - rhs).norm();
    return out;
}

Eigen::Matrix3d random_rotation(std::uint64_t seed, std::uint64_t sample) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
    const double tau = 2.0 * std::numbers::pi;
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const Eigen::Quaterniond q(b * std::cos(tau * u3), a * std::sin(tau * u2), a * std::cos(tau * u2),
                               b * std::sin(tau * u3));
    return q.toRotationMatrix();
}

Experiment::Experiment(ProtocolSettings settings)
    : set_(std::move(settings)), s_(make_structure(set_.params, set_.n_phon)) {
    const auto& ps = set_.pulses;
    if (!(ps.sigma_fs > 0.0)) throw DomainError("Experiment: sigma_t must be positive");
    if (ps.auto_resonant) {
        w_plus_ = to_wavenumber({s_.omega_bg()}).cm;
        w_minus_ = to_wavenumber({s_.omega_ag()}).cm;
    } else {
        w_plus_ = ps.omega_plus_cm;
        w_minus_ = ps.omega_minus_cm;
    }
    if (ps.eta) {
        eta_ = *ps.eta;
    } else {
        if (!(ps.depletion > 0.0 && ps.depletion < 1.0)) throw DomainError("Experiment: depletion must lie in (0, 1)");
        const double mu = std::max(s_.mu_ga.norm(), s_.mu_gb.norm());
        eta_ = std::sqrt(ps.depletion / (2.0 * std::numbers::pi)) / (ps.sigma_fs * mu);
    }
    if (!(eta_ >= 0.0)) throw DomainError("Experiment: eta must be non-negative");

    // One dt for every run so that pair, probe-only and pump-only records share a grid.
    const auto pair = make_pair({Target::plus, Target::minus}, 0.0);
    const std::array<Pulse, 4> all{pair.pump, pair.probe, make_pair({Target::minus, Target::plus}, 0.0).pump,
                                   make_pair({Target::minus, Target::plus}, 0.0).probe};
    PropagationPlan probe_plan = set_.plan;
    probe_plan.t_start_fs = 0.0;
    probe_plan.t_end_fs = 1.0;
    dt_ = resolve_plan(probe_plan, s_, all).dt_fs;
}

PulsePair Experiment::make_pair(PairLabel label, double tau, const Eigen::Matrix3d& R, double probe_phase) const {
    const double sig = set_.pulses.sigma_fs;
    const Vec3 e_pump = R.transpose() * Vec3::UnitZ();
    const Vec3 e_probe = R.transpose() * Vec3(std::sin(kMagicAngle), 0.0, std::cos(kMagicAngle));
    PulsePair pp;
    pp.label = label;
    pp.pump = Pulse{carrier_cm(label.pump), pump_center(), sig, e_pump.normalized(), eta_, 0.0};
    pp.probe = Pulse{carrier_cm(label.probe), pump_center() + tau, sig, e_probe.normalized(), eta_, probe_phase};
    return pp;
}

std::array<PulsePair, 4> Experiment::make_pairs(double tau, const Eigen::Matrix3d& R) const {
    std::array<PulsePair, 4> out;
    for (std::size_t r = 0; r < 4; ++r) out[r] = make_pair(kPairOrder[r], tau, R);
    return out;
}

PropagationPlan Experiment::plan_for(double t_end) const {
    PropagationPlan p = set_.plan;
    p.dt_fs = dt_;
    p.t_start_fs = 0.0;
    p.t_end_fs = t_end;
    return p;
}

Eigen::Vector4d Experiment::signals(double tau, const Eigen::Matrix3d& R, std::uint64_t orientation) const {
    if (tau < 0.0) throw DomainError("Experiment::signals: delay must be non-negative");
    const double sig = set_.pulses.sigma_fs;
    const PropagationPlan plan = plan_for(pump_center() + tau + 5.0 * sig);

    std::array<SignalRecord, 2> pump_only, probe_only;
    for (Target t : {Target::plus, Target::minus}) {
        const auto pp = make_pair({t, t}, tau, R);
        const std::array<Pulse, 1> pump{pp.pump}, probe{pp.probe};
        pump_only[t == Target::plus ? 0 : 1] = simulate(s_, pump, plan);
        probe_only[t == Target::plus ? 0 : 1] = simulate(s_, probe, plan);
    }
    Eigen::Vector4d S;
    for (std::size_t r = 0; r < 4; ++r) {
        const PairLabel lab = kPairOrder[r];
        if (set_.require_isolated) make_pair(lab, tau, R).validate(true);
        const auto run = [&](double phase) {
            const auto pp = make_pair(lab, tau, R, phase);
            const std::array<Pulse, 2> pulses{pp.pump, pp.probe};
            SignalRecord rec = simulate(s_, pulses, plan);
            rec.label = lab;
            rec.phase = phase;
            rec.orientation = orientation;
            return rec;
        };
        const SignalRecord avg = phase_average(run(0.0), run(std::numbers::pi));
        const SignalRecord sub = pump_only_subtract(
            probe_only_subtract(avg, probe_only[lab.probe == Target::plus ? 0 : 1]),
            pump_only[lab.pump == Target::plus ? 0 : 1]);
        S(static_cast<Eigen::Index>(r)) = sub.S;
        if (set_.verbose) {
            std::fprintf(stderr, "{\"task\":\"pair\",\"orientation\":%llu,\"label\":\"%s\",\"tau_fs\":%.17g,\"S\":%.17g}\n",
                         static_cast<unsigned long long>(orientation), lab.str().c_str(), tau, sub.S);
        }
    }
    return S;
}

std::array<PulsePair, 4> polarization_selective_pairs(const Experiment& exp, double tau) {
    const ExcitonStructure& s = exp.structure();
    auto perp = [](const Vec3& keep, const Vec3& avoid) -> Vec3 {
        const Vec3 a = avoid.normalized();
        const Vec3 v = keep - keep.dot(a) * a;
        if (v.norm() < 1e-12 * keep.norm()) throw DomainError("polarization_selective_pairs: parallel dipoles");
        return v.normalized();
    };
    const Vec3 e_plus = perp(s.mu_gb, s.mu_ga);
    const Vec3 e_minus = perp(s.mu_ga, s.mu_gb);
    auto pol = [&](Target t) { return t == Target::plus ? e_plus : e_minus; };
    std::array<PulsePair, 4> out = exp.make_pairs(tau);
    for (auto& pp : out) {
        pp.pump.polarization = pol(pp.label.pump);
        pp.probe.polarization = pol(pp.label.probe);
    }
    return out;
}

namespace {

Eigen::Vector4d solve4(const Eigen::Matrix4d& M, const Eigen::Vector4d& rhs) {
    return M.fullPivLu().solve(rhs);
}

}  // namespace

EnsembleResult ensemble_average(const Experiment& exp, std::span<const double> taus, std::size_t N,
                                std::uint64_t seed, bool random) {
    if (N < 1) throw DomainError("ensemble_average: N must be >= 1");
    if (taus.empty()) throw DomainError("ensemble_average: empty delay grid");
    const std::size_t nt = taus.size();

    struct Sample {
        InversionSystem sys;
        std::vector<Eigen::Vector4d> S;
    };
    std::vector<Sample> samples(N);
    parallel_for(N, exp.settings().threads, [&](std::size_t i) {
        const Eigen::Matrix3d R = random ? random_rotation(seed, i) : Eigen::Matrix3d::Identity();
        Sample& smp = samples[i];
        smp.sys = build_inversion(exp.make_pairs(taus[0], R), exp.structure());
        smp.S.resize(nt);
        for (std::size_t j = 0; j < nt; ++j) smp.S[j] = exp.signals(taus[j], R, i);
    });

    // Fixed-order reduction.
    EnsembleResult res;
    res.N = N;
    res.seed = seed;
    res.random = random;
    res.signal.assign(nt, Eigen::Vector4d::Zero());
    for (const auto& smp : samples) {
        res.system.M += smp.sys.M;
        res.system.G += smp.sys.G;
        for (std::size_t j = 0; j < nt; ++j) res.signal[j] += smp.S[j];
    }
    const double inv = 1.0 / static_cast<double>(N);
    res.system.M *= inv;
    res.system.G *= inv;
    for (auto& s : res.signal) s *= inv;
    res.system.finalize();

    res.chi.resize(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        const Recovery rc = recover_chi(res.signal[j], res.system, exp.settings().kappa_max, taus[j]);
        res.chi[j].tau = taus[j];
        res.chi[j].mean = rc.chi.v;
        res.chi[j].residual = rc.residual;
    }

    // Bootstrap over orientations.
    const std::size_t B = N > 1 ? exp.settings().bootstrap : 0;
    if (B > 1) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xb0075u};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::size_t> pick(0, N - 1);
        std::vector<std::vector<Eigen::Vector4d>> boot(nt, std::vector<Eigen::Vector4d>(B));
        for (std::size_t b = 0; b < B; ++b) {
            Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
            Eigen::Vector4d G = Eigen::Vector4d::Zero();
            std::vector<Eigen::Vector4d> S(nt, Eigen::Vector4d::Zero());
            for (std::size_t k = 0; k < N; ++k) {
                const Sample& smp = samples[pick(rng)];
                M += smp.sys.M;
                G += smp.sys.G;
                for (std::size_t j = 0; j < nt; ++j) S[j] += smp.S[j];
            }
            for (std::size_t j = 0; j < nt; ++j) boot[j][b] = solve4(M * inv, (S[j] + G) * inv);
        }
        for (std::size_t j = 0; j < nt; ++j) {
            Eigen::Vector4d mean = Eigen::Vector4d::Zero();
            for (const auto& x : boot[j]) mean += x;
            mean /= static_cast<double>(B);
            Eigen::Vector4d var = Eigen::Vector4d::Zero();
            for (const auto& x : boot[j]) var += (x - mean).cwiseAbs2();
            res.chi[j].std = (var / static_cast<double>(B - 1)).cwiseSqrt();
        }
    }

    // Diagnostic: invert every orientation on its own, then average.
    res.per_orientation_invert.assign(nt, Eigen::Vector4d::Zero());
    std::vector<std::size_t> used(nt, 0);
    for (const auto& smp : samples) {
        const auto lu = smp.sys.M.fullPivLu();
        if (lu.rank() < 4) continue;
        for (std::size_t j = 0; j < nt; ++j) {
            res.per_orientation_invert[j] += lu.solve(smp.S[j] + smp.sys.G);
            ++used[j];
        }
    }
    for (std::size_t j = 0; j < nt; ++j) {
        if (used[j] > 0) res.per_orientation_invert[j] /= static_cast<double>(used[j]);
    }
    return res;
}

WitnessReport run_witness_protocol(const Experiment& exp, double T1, double T2, std::size_t N, std::uint64_t seed,
                                   bool random) {
    if (!(T1 > 0.0) || !(T2 > 0.0)) throw DomainError("run_witness_protocol: T1 and T2 must be positive");
    const std::array<double, 3> taus{T1, T2, T1 + T2};
    WitnessReport rep;
    rep.ensemble = ensemble_average(exp, taus, N, seed, random);
    for (std::size_t k = 0; k < 3; ++k) rep.sim_chi[k] = rep.ensemble.chi[k];
    auto as_chi = [](const ChiStats& c) { return ReducedChi{c.tau, c.mean}; };
    rep.sim = witness_wb(as_chi(rep.sim_chi[0]), as_chi(rep.sim_chi[1]), as_chi(rep.sim_chi[2]));
    const ChiOracle oracle(exp.structure());
    for (std::size_t k = 0; k < 3; ++k) rep.theory_chi[k] = oracle.at(taus[k]);
    rep.theory = witness_wb(rep.theory_chi[0], rep.theory_chi[1], rep.theory_chi[2]);
    return rep;
}

double deviation_sigma(std::span<const double> taus, std::span<const Eigen::Vector4d> theo,
                       std::span<const Eigen::Vector4d> sim) {
    if (taus.size() < 2) throw DomainError("deviation_sigma: need at least two delays");
    if (theo.size() != taus.size() || sim.size() != taus.size()) {
        throw DomainError("deviation_sigma: length mismatch");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < taus.size(); ++k) {
        const double h = taus[k] - taus[k - 1];
        if (!(h > 0.0)) throw DomainError("deviation_sigma: delays must increase");
        num += 0.5 * h * ((theo[k] - sim[k]).squaredNorm() + (theo[k - 1] - sim[k - 1]).squaredNorm());
        den += 0.5 * h * (theo[k].squaredNorm() + theo[k - 1].squaredNorm());
    }
    if (!(den > 0.0)) throw DomainError("deviation_sigma: vanishing reference");
    return num / den;
}

std::vector<RSweepPoint> r_sweep(const ProtocolSettings& base, std::span<const double> J_values,
                                 std::span<const double> taus, std::size_t N, std::uint64_t seed) {
    if (taus.size() < 2 || !(taus.back() > taus.front()) || taus.front() < 0.0) {
        throw DomainError("r_sweep: need a window t1 > t0 >= 0");
    }
    std::vector<RSweepPoint> out;
    for (double J : J_values) {
        ProtocolSettings set = base;
        set.params.J = J;
        set.n_phon = 1;
        const Experiment exp(set);
        const EnsembleResult ens = ensemble_average(exp, taus, N, seed);
        const ChiOracle oracle(exp.structure());
        std::vector<Eigen::Vector4d> theo, sim;
        for (std::size_t k = 0; k < taus.size(); ++k) {
            theo.push_back(oracle.at(taus[k]).v);
            sim.push_back(ens.chi[k].mean);
        }
        out.push_back({J, coupling_ratio(set.params), deviation_sigma(taus, theo, sim)});
    }
    return out;
}

}  // namespace vdimer
