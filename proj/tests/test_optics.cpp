// test_optics - pulse spectra, Pi factors, pair labels, perturbative signal
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vdimer/errors.hpp"
#include "vdimer/model.hpp"
#include "vdimer/optics.hpp"

using namespace vdimer;

namespace {

Pulse test_pulse() {
    Pulse p;
    p.omega_cm = 15500.0;
    p.t_center_fs = 400.0;
    p.sigma_fs = 60.0;
    p.eta = 2e-4;
    p.phase = 0.7;
    p.polarization = Vec3(1.0, 2.0, 2.0) / 3.0;
    return p;
}

// int eta E(t) e^{i w t} dt by the trapezoid rule over +-12 sigma
cplx quadrature_spectrum(const Pulse& p, double omega_cm) {
    const double w = internal(omega_cm);
    const double h = p.sigma_fs / 200.0;
    cplx sum{0.0};
    for (double t = p.t_center_fs - 12.0 * p.sigma_fs; t <= p.t_center_fs + 12.0 * p.sigma_fs; t += h) {
        sum += p.eta * field_at(p, t, true) * std::polar(1.0, w * t);
    }
    return sum * h;
}

}  // namespace

TEST_CASE("spectral amplitude equals the Fourier integral of the field") {
    const Pulse p = test_pulse();
    for (double w : {15500.0, 15400.0, 15650.0, 16000.0}) {
        const cplx a = spectral_amplitude(p, Wavenumber{w});
        const cplx b = quadrature_spectrum(p, w);
        CHECK(std::abs(a - b) < 1e-10 * std::abs(quadrature_spectrum(p, 15500.0)));
    }
    // resonant magnitude eta sigma sqrt(2 pi)
    CHECK(std::abs(spectral_amplitude(p, Wavenumber{15500.0})) ==
          doctest::Approx(p.eta * p.sigma_fs * std::sqrt(2.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("Parseval: spectral and temporal energies agree") {
    const Pulse p = test_pulse();
    double time_side = 0.0;
    for (double t = 0.0; t < 800.0; t += 0.25) time_side += std::norm(p.eta * field_at(p, t, true)) * 0.25;
    double freq_side = 0.0;
    const double dw = 0.5;  // cm^-1
    for (double w = 14500.0; w < 16500.0; w += dw) {
        freq_side += std::norm(spectral_amplitude(p, Wavenumber{w})) * internal(dw);
    }
    CHECK(freq_side / (2.0 * M_PI) == doctest::Approx(time_side).epsilon(1e-9));
}

TEST_CASE("field without the rotating-wave approximation is real") {
    const Pulse p = test_pulse();
    const cplx full = field_at(p, 431.0, false);
    CHECK(full.imag() == 0.0);
    CHECK(full.real() == doctest::Approx(2.0 * field_at(p, 431.0, true).real()));
}

TEST_CASE("Pi factor is the squared Rabi amplitude") {
    const Pulse p = test_pulse();
    const Vec3 mu(0.3, -0.4, 1.2);
    const double expect = std::norm(spectral_amplitude(p, Wavenumber{15480.0})) * std::pow(mu.dot(p.polarization), 2);
    CHECK(pi_factor(p, mu, Wavenumber{15480.0}) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(std::abs(omega_amplitude(p, mu, Wavenumber{15480.0})) == doctest::Approx(std::sqrt(expect)));
}

TEST_CASE("pulse validation") {
    Pulse p = test_pulse();
    CHECK_NOTHROW(p.validate());
    p.sigma_fs = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = test_pulse();
    p.polarization = Vec3(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = test_pulse();
    p.eta = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("pulse pair ordering and isolation") {
    PulsePair pp{test_pulse(), test_pulse(), {}};
    pp.probe.t_center_fs = pp.pump.t_center_fs + 500.0;
    CHECK(pp.delay() == 500.0);
    CHECK(!pp.isolated());
    CHECK_NOTHROW(pp.validate(false));
    CHECK_THROWS_AS(pp.validate(true), DomainError);
    pp.probe.t_center_fs = pp.pump.t_center_fs + 601.0;
    CHECK(pp.isolated());
    pp.probe.t_center_fs = pp.pump.t_center_fs - 1.0;
    CHECK_THROWS_AS(pp.validate(false), DomainError);
}

TEST_CASE("pair labels") {
    for (const auto& l : kPairOrder) CHECK(PairLabel::parse(l.str()) == l);
    CHECK(PairLabel::parse("+-").probe == Target::plus);
    CHECK(PairLabel::parse("+-").pump == Target::minus);
    CHECK_THROWS_AS(PairLabel::parse("+"), DomainError);
    CHECK_THROWS_AS(PairLabel::parse("+x"), DomainError);
}

TEST_CASE("process tensor containers") {
    const ReducedChi r{10.0, {0.9, 0.2, 0.1, 0.8}};
    CHECK(r.pop(alpha, beta) == 0.2);
    CHECK(r.pop(beta, alpha) == 0.1);
    const FullChi f = FullChi::from_populations(r);
    CHECK(f.reduced().v == r.v);
    CHECK(f.at(alpha, beta, alpha, alpha) == cplx(0.0));
    CHECK(FullChi::identity().reduced().v == Eigen::Vector4d(1, 0, 0, 1));
    CHECK(FullChi::identity().at(alpha, beta, alpha, beta) == cplx(1.0));
}

TEST_CASE("perturbative signal from Pi factors") {
    const auto s = make_structure(apc_preset(), 2);
    PulsePair pp;
    pp.pump = test_pulse();
    pp.pump.omega_cm = s.eps_alpha_cm;
    pp.probe = test_pulse();
    pp.probe.omega_cm = s.eps_beta_cm;
    pp.probe.polarization = Vec3(0.6, 0.0, 0.8);
    pp.probe.t_center_fs = 1500.0;
    const ReducedChi chi{1100.0, {0.93, 0.04, 0.07, 0.96}};

    const Vec3 ga = s.mu_ga, gb = s.mu_gb, fa = s.mu_fa, fb = s.mu_fb;
    auto w = [](double x) { return to_wavenumber({x}); };
    const double P[2] = {pi_factor(pp.pump, ga, w(s.omega_ag())), pi_factor(pp.pump, gb, w(s.omega_bg()))};
    const double Qg[2] = {pi_factor(pp.probe, ga, w(s.omega_ag())), pi_factor(pp.probe, gb, w(s.omega_bg()))};
    const double Qf[2] = {pi_factor(pp.probe, fa, w(s.omega_fa())), pi_factor(pp.probe, fb, w(s.omega_fb()))};
    double esa = 0.0, se = 0.0, gsb = 0.0;
    for (int q = 0; q < 2; ++q) {
        for (int p = 0; p < 2; ++p) {
            esa += P[p] * chi.pop(q, p) * Qf[q];
            se -= P[p] * chi.pop(q, p) * Qg[q];
            gsb -= P[p] * Qg[q];
        }
    }
    const SignalParts parts = perturbative_signal(pp, s, chi);
    CHECK(parts.esa == doctest::Approx(esa).epsilon(1e-13));
    CHECK(parts.se == doctest::Approx(se).epsilon(1e-13));
    CHECK(parts.gsb == doctest::Approx(gsb).epsilon(1e-13));
    CHECK(parts.esa > 0.0);
    CHECK(parts.gsb < 0.0);

    // population-only tensor through the 16-element form
    const SignalParts full = perturbative_signal(pp, s, FullChi::from_populations(chi));
    CHECK(full.total() == doctest::Approx(parts.total()).epsilon(1e-13));

    // fourth order in the field
    PulsePair strong = pp;
    strong.pump.eta *= 2.0;
    strong.probe.eta *= 2.0;
    CHECK(perturbative_signal(strong, s, chi).total() == doctest::Approx(16.0 * parts.total()).epsilon(1e-13));

    // a probe polarized out of the dipole plane sees nothing
    PulsePair dark = pp;
    dark.probe.polarization = Vec3::UnitZ();
    CHECK(perturbative_signal(dark, s, chi).total() == 0.0);
}
