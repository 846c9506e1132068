// test_protocol - signal bookkeeping, inversion, orientations, ensembles
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vdimer/errors.hpp"
#include "vdimer/protocol.hpp"

#include <atomic>
#include <random>

using namespace vdimer;

namespace {

ProtocolSettings small_settings(int n_phon = 0) {
    ProtocolSettings s;
    s.params = apc_preset();
    s.n_phon = n_phon;
    s.threads = 1;
    s.bootstrap = 20;
    return s;
}

SignalRecord record(std::vector<double> t, std::vector<double> fa, double S) {
    SignalRecord r;
    r.t = std::move(t);
    r.flux_absorption = fa;
    r.flux_emission = std::vector<double>(fa.size(), 0.0);
    r.S = S;
    return r;
}

}  // namespace

TEST_CASE("phase averaging and subtraction") {
    const SignalRecord a = record({0, 1, 2}, {1, 2, 3}, 4.0);
    const SignalRecord b = record({0, 1, 2}, {3, 2, 1}, 2.0);
    const SignalRecord avg = phase_average(a, b);
    CHECK(avg.S == 3.0);
    CHECK(avg.flux_absorption == std::vector<double>{2, 2, 2});
    const SignalRecord d = pump_only_subtract(probe_only_subtract(a, b), a);
    CHECK(d.S == -2.0);
    const SignalRecord c = record({0, 1.5, 2}, {1, 2, 3}, 0.0);
    CHECK_THROWS_AS(phase_average(a, c), DomainError);
    CHECK_THROWS_AS(probe_only_subtract(a, record({0, 1}, {1, 2}, 0.0)), DomainError);
}

TEST_CASE("inversion round trip") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        InversionSystem sys;
        for (auto& x : sys.M.reshaped()) x = u(rng);
        for (auto& x : sys.G) x = u(rng);
        sys.finalize();
        if (sys.kappa > 1e4) continue;
        const Eigen::Vector4d chi(u(rng), u(rng), u(rng), u(rng));
        const Recovery r = recover_chi(sys.M * chi - sys.G, sys);
        CHECK((r.chi.v - chi).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(r.residual < 1e-12);
    }
}

TEST_CASE("ill-conditioned systems are refused") {
    InversionSystem sys;
    sys.M = Eigen::Matrix4d::Identity();
    sys.M(3, 3) = 1e-9;
    sys.finalize();
    CHECK(sys.kappa == doctest::Approx(1e9));
    CHECK(sys.det == doctest::Approx(1e-9));
    CHECK(sys.relative_det() == doctest::Approx(1e-9));
    try {
        recover_chi(Eigen::Vector4d::Ones(), sys);
        CHECK(false);
    } catch (const IllConditionedError& e) {
        CHECK(e.kappa == doctest::Approx(1e9));
    }
    CHECK_NOTHROW(recover_chi(Eigen::Vector4d::Ones(), sys, 1e10));
}

TEST_CASE("inversion matrix from Pi factors") {
    const Experiment exp(small_settings(1));
    const auto& s = exp.structure();
    const Eigen::Matrix3d R = random_rotation(4, 2);
    const auto pairs = exp.make_pairs(300.0, R);
    const InversionSystem sys = build_inversion(pairs, s);
    auto w = [](double x) { return to_wavenumber({x}); };
    for (int r = 0; r < 4; ++r) {
        const Pulse& P = pairs[static_cast<std::size_t>(r)].pump;
        const Pulse& Q = pairs[static_cast<std::size_t>(r)].probe;
        const double Pg[2] = {pi_factor(P, s.mu_ga, w(s.omega_ag())), pi_factor(P, s.mu_gb, w(s.omega_bg()))};
        const double Qg[2] = {pi_factor(Q, s.mu_ga, w(s.omega_ag())), pi_factor(Q, s.mu_gb, w(s.omega_bg()))};
        const double Qf[2] = {pi_factor(Q, s.mu_fa, w(s.omega_fa())), pi_factor(Q, s.mu_fb, w(s.omega_fb()))};
        double G = 0.0;
        for (int q = 0; q < 2; ++q) {
            for (int p = 0; p < 2; ++p) {
                CHECK(sys.M(r, 2 * q + p) == doctest::Approx(Pg[p] * (Qf[q] - Qg[q])).epsilon(1e-13));
                G += Qg[q] * Pg[p];
            }
        }
        CHECK(sys.G(r) == doctest::Approx(G).epsilon(1e-13));
    }
    auto swapped = pairs;
    std::swap(swapped[0], swapped[1]);
    CHECK_THROWS_AS(build_inversion(swapped, s), DomainError);
}

TEST_CASE("random rotations") {
    const Eigen::Matrix3d R = random_rotation(7, 3);
    CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(R.determinant() == doctest::Approx(1.0));
    CHECK(random_rotation(7, 3) == R);
    CHECK(random_rotation(7, 4) != R);
    CHECK(random_rotation(8, 3) != R);
}

TEST_CASE("pulse factory geometry") {
    const Experiment exp(small_settings());
    const PulsePair pp = exp.make_pair({Target::plus, Target::minus}, 250.0);
    CHECK(pp.delay() == doctest::Approx(250.0));
    CHECK(pp.pump.t_center_fs == doctest::Approx(5.0 * 103.0));
    CHECK(pp.pump.polarization.isApprox(Vec3::UnitZ()));
    CHECK(std::acos(pp.pump.polarization.dot(pp.probe.polarization)) == doctest::Approx(kMagicAngle));
    CHECK(pp.probe.omega_cm == doctest::Approx(exp.structure().eps_beta_cm));
    CHECK(pp.pump.omega_cm == doctest::Approx(exp.structure().eps_alpha_cm));
    // a rotated dimer sees the polarizations through R^T
    const Eigen::Matrix3d R = random_rotation(1, 1);
    const PulsePair pr = exp.make_pair({Target::plus, Target::minus}, 250.0, R);
    CHECK(pr.pump.polarization.isApprox(R.transpose() * Vec3::UnitZ()));
    CHECK(pr.probe.polarization.dot(pr.pump.polarization) == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("field strength from the depletion target") {
    const Experiment exp(small_settings());
    const auto& s = exp.structure();
    Pulse p = exp.make_pair({Target::minus, Target::minus}, 0.0).pump;
    p.polarization = s.mu_ga.normalized();
    const double strongest = std::max(s.mu_ga.norm(), s.mu_gb.norm());
    const double expect = 1e-3 * s.mu_ga.squaredNorm() / (strongest * strongest);
    CHECK(pi_factor(p, s.mu_ga, to_wavenumber({s.omega_ag()})) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("deviation metric") {
    const std::vector<double> taus{0, 100, 200, 300};
    std::vector<Eigen::Vector4d> a{{1, 0, 0, 1}, {0.9, 0.1, 0.1, 0.9}, {0.8, 0.2, 0.2, 0.8}, {0.85, 0.1, 0.15, 0.9}};
    std::vector<Eigen::Vector4d> b;
    for (const auto& x : a) b.push_back(2.0 * x);
    CHECK(deviation_sigma(taus, a, a) == 0.0);
    CHECK(deviation_sigma(taus, a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(deviation_sigma(taus, a, std::vector<Eigen::Vector4d>(2)), DomainError);
}

TEST_CASE("parallel loop visits every index once") {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 7) throw NumericalError("boom");
                                 }),
                    NumericalError);
}

TEST_CASE("weak-field signals agree with the perturbative form") {
    const Experiment exp(small_settings(0));
    const Eigen::Matrix3d R = random_rotation(2, 0);
    const double tau = 1200.0;
    const Eigen::Vector4d S = exp.signals(tau, R);
    const ChiOracle o(exp.structure());
    const auto pairs = exp.make_pairs(tau, R);
    for (int r = 0; r < 4; ++r) {
        const double pert = perturbative_signal(pairs[static_cast<std::size_t>(r)], exp.structure(), o.at(tau)).total();
        CHECK(S(r) == doctest::Approx(pert).epsilon(0.05));
    }
}

TEST_CASE("purely electronic fermion dimer has a singular inversion") {
    // mu_f,alpha = -+mu_g,beta at the same frequency, so two columns are opposite
    const Experiment exp(small_settings(0));
    const InversionSystem sys = build_inversion(exp.make_pairs(300.0, random_rotation(1, 0)), exp.structure());
    CHECK(sys.relative_det() < 1e-12);
    CHECK((sys.M.col(0) + sys.M.col(2)).norm() < 1e-12 * sys.M.norm());
}

TEST_CASE("ensemble runs are reproducible") {
    const Experiment exp(small_settings(1));
    const std::array<double, 1> taus{900.0};
    const EnsembleResult a = ensemble_average(exp, taus, 3, 42);
    const EnsembleResult b = ensemble_average(exp, taus, 3, 42);
    CHECK(a.chi[0].mean == b.chi[0].mean);
    CHECK(a.chi[0].std == b.chi[0].std);
    CHECK(a.signal[0] == b.signal[0]);
    CHECK(a.N == 3u);
    const EnsembleResult c = ensemble_average(exp, taus, 3, 43);
    CHECK(c.signal[0] != a.signal[0]);
}
