#include "vdimer/optics.hpp"
#include "vdimer/errors.hpp"

#include <cmath>
#include <numbers>

namespace vdimer {

void Pulse::validate() const {
    if (!(sigma_fs > 0.0)) throw DomainError("Pulse: sigma_t must be positive");
    if (!(eta >= 0.0)) throw DomainError("Pulse: eta must be non-negative");
    if (std::abs(polarization.norm() - 1.0) > 1e-12) throw DomainError("Pulse: polarization must be a unit vector");
    if (!std::isfinite(omega_cm) || !std::isfinite(t_center_fs) || !std::isfinite(phase)) {
        throw DomainError("Pulse: non-finite field parameter");
    }
}

std::string PairLabel::str() const {
    auto c = [](Target t) { return t == Target::plus ? '+' : '-'; };
    return {c(probe), c(pump)};
}

PairLabel PairLabel::parse(const std::string& s) {
    auto t = [](char c) {
        if (c == '+') return Target::plus;
        if (c == '-') return Target::minus;
        throw DomainError("PairLabel: expected '+' or '-'");
    };
    if (s.size() != 2) throw DomainError("PairLabel: expected two characters (probe, pump)");
    return {t(s[0]), t(s[1])};
}

void PulsePair::validate(bool require_isolated) const {
    pump.validate();
    probe.validate();
    if (!(delay() > 0.0)) throw DomainError("PulsePair: probe must follow the pump");
    if (require_isolated && !isolated()) throw DomainError("PulsePair: pulses overlap within 5 sigma");
}

cplx field_at(const Pulse& p, double t, bool rwa) {
    const double x = (t - p.t_center_fs) / p.sigma_fs;
    const double env = std::exp(-0.5 * x * x);
    const double arg = p.omega() * t + p.phase;
    if (rwa) return env * std::polar(1.0, -arg);
    return cplx(2.0 * env * std::cos(arg), 0.0);
}

cplx spectral_amplitude(const Pulse& p, Wavenumber omega) {
    const double det = to_angular(omega).rad_per_fs - p.omega();
    const double mag = p.eta * p.sigma_fs * std::sqrt(2.0 * std::numbers::pi) *
                       std::exp(-0.5 * det * det * p.sigma_fs * p.sigma_fs);
    return mag * std::polar(1.0, det * p.t_center_fs - p.phase);
}

cplx omega_amplitude(const Pulse& p, const Vec3& mu_ij, Wavenumber omega_ij) {
    return spectral_amplitude(p, omega_ij) * mu_ij.dot(p.polarization);
}

double pi_factor(const Pulse& p, const Vec3& mu_ij, Wavenumber omega_ij) {
    return std::norm(omega_amplitude(p, mu_ij, omega_ij));
}

ReducedChi FullChi::reduced() const {
    ReducedChi r;
    r.tau = tau;
    for (int q = 0; q < 2; ++q) {
        for (int p = 0; p < 2; ++p) r.v(2 * q + p) = at(q, q, p, p).real();
    }
    return r;
}

FullChi FullChi::from_populations(const ReducedChi& r) {
    FullChi c;
    c.tau = r.tau;
    for (int q = 0; q < 2; ++q) {
        for (int p = 0; p < 2; ++p) c.at(q, q, p, p) = r.pop(q, p);
    }
    return c;
}

FullChi FullChi::identity(double tau) {
    FullChi c;
    c.tau = tau;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c.at(i, j, i, j) = 1.0;
    return c;
}

TransitionAmplitudes transition_amplitudes(const Pulse& p, const ExcitonStructure& s) {
    TransitionAmplitudes t;
    t.ground[alpha] = omega_amplitude(p, s.mu_ga, to_wavenumber({s.omega_ag()}));
    t.ground[beta] = omega_amplitude(p, s.mu_gb, to_wavenumber({s.omega_bg()}));
    t.biex[alpha] = omega_amplitude(p, s.mu_fa, to_wavenumber({s.omega_fa()}));
    t.biex[beta] = omega_amplitude(p, s.mu_fb, to_wavenumber({s.omega_fb()}));
    return t;
}

SignalParts perturbative_signal(const PulsePair& pair, const ExcitonStructure& s, const ReducedChi& chi) {
    const auto P = transition_amplitudes(pair.pump, s);
    const auto Q = transition_amplitudes(pair.probe, s);
    SignalParts out;
    for (int p = 0; p < 2; ++p) {
        const double pump = std::norm(P.ground[p]);
        for (int q = 0; q < 2; ++q) {
            const double esa = std::norm(Q.biex[q]);
            const double bleach = std::norm(Q.ground[q]);
            out.esa += esa * pump * chi.pop(q, p);
            out.se -= bleach * pump * chi.pop(q, p);
            out.gsb -= bleach * pump;
        }
    }
    return out;
}

SignalParts perturbative_signal(const PulsePair& pair, const ExcitonStructure& s, const FullChi& chi) {
    const auto P = transition_amplitudes(pair.pump, s);
    const auto Q = transition_amplitudes(pair.probe, s);
    cplx esa{0.0}, se{0.0};
    double gsb = 0.0;
    for (int q = 0; q < 2; ++q) {
        for (int p = 0; p < 2; ++p) {
            // pump prepares |q><p|
            const cplx prep = P.ground[q] * std::conj(P.ground[p]);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    const cplx c = chi.at(i, j, q, p);
                    esa += prep * Q.biex[i] * std::conj(Q.biex[j]) * c;
                    se -= prep * std::conj(Q.ground[i]) * Q.ground[j] * c;
                }
            }
        }
    }
    for (int i = 0; i < 2; ++i) {
        for (int p = 0; p < 2; ++p) gsb -= std::norm(Q.ground[i]) * std::norm(P.ground[p]);
    }
    return {esa.real(), se.real(), gsb};
}

}  // namespace vdimer
