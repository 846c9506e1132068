// optics.hpp - Gaussian pulses, spectral amplitudes, Pi factors and perturbative signals
//
// Fourier convention: E~(w) = int E(t) e^{i w t} dt, so a resonant pulse has |E~| = eta sigma sqrt(2 pi).
#pragma once

#include "vdimer/core.hpp"
#include "vdimer/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>

namespace vdimer {

using cplx = std::complex<double>;

struct Pulse {
    double omega_cm{0.0};      // carrier, cm^-1
    double t_center_fs{0.0};
    double sigma_fs{100.0};    // temporal standard deviation
    Vec3 polarization{Vec3::UnitZ()};
    double eta{0.0};           // rad/fs per dipole unit
    double phase{0.0};         // rad

    void validate() const;
    double omega() const noexcept { return internal(omega_cm); }
};

// "+" targets g -> beta0, "-" targets g -> alpha0.
enum class Target { plus, minus };

struct PairLabel {
    Target probe{Target::plus};
    Target pump{Target::plus};

    std::string str() const;  // probe then pump, e.g. "+-"
    static PairLabel parse(const std::string& s);
    friend bool operator==(PairLabel, PairLabel) = default;
};

// Row order of the inversion: (+,+), (+,-), (-,+), (-,-) as (probe, pump).
inline constexpr std::array<PairLabel, 4> kPairOrder{{{Target::plus, Target::plus},
                                                      {Target::plus, Target::minus},
                                                      {Target::minus, Target::plus},
                                                      {Target::minus, Target::minus}}};

struct PulsePair {
    Pulse pump;
    Pulse probe;
    PairLabel label;

    double delay() const noexcept { return probe.t_center_fs - pump.t_center_fs; }
    // Centers more than 5 sigma apart on each side.
    bool isolated() const noexcept { return delay() > 5.0 * (pump.sigma_fs + probe.sigma_fs); }
    // Throws when tau <= 0, or when require_isolated and the pulses overlap.
    void validate(bool require_isolated) const;
};

// Scalar envelope x carrier, without eta and polarization.
cplx field_at(const Pulse& p, double t_fs, bool rwa);

// E~(omega) including eta; omega in cm^-1.
cplx spectral_amplitude(const Pulse& p, Wavenumber omega);

// Omega_ij = E~(omega_ij) mu_ij . e
cplx omega_amplitude(const Pulse& p, const Vec3& mu_ij, Wavenumber omega_ij);

// |Omega|^2
double pi_factor(const Pulse& p, const Vec3& mu_ij, Wavenumber omega_ij);

// Branch index: 0 = alpha, 1 = beta.
enum Branch : int { alpha = 0, beta = 1 };

// chi_qqpp at one delay, vector order (aaaa, aabb, bbaa, bbbb).
struct ReducedChi {
    double tau{0.0};
    Eigen::Vector4d v{1.0, 0.0, 0.0, 1.0};

    double aaaa() const { return v(0); }
    double aabb() const { return v(1); }
    double bbaa() const { return v(2); }
    double bbbb() const { return v(3); }
    // chi_qqpp
    double pop(int q, int p) const { return v(2 * q + p); }
};

// Full 1EM process tensor, at(i, j, p, q) maps rho_pq(0) to rho_ij(t).
struct FullChi {
    double tau{0.0};
    std::array<cplx, 16> data{};

    cplx& at(int i, int j, int p, int q) { return data[static_cast<std::size_t>(((i * 2 + j) * 2 + p) * 2 + q)]; }
    cplx at(int i, int j, int p, int q) const {
        return data[static_cast<std::size_t>(((i * 2 + j) * 2 + p) * 2 + q)];
    }
    ReducedChi reduced() const;
    static FullChi from_populations(const ReducedChi& r);  // coherence elements zero
    static FullChi identity(double tau = 0.0);
};

// Transition amplitudes of one pulse on the four vibrationless transitions.
struct TransitionAmplitudes {
    std::array<cplx, 2> ground;  // Omega_{pg}, p = alpha, beta
    std::array<cplx, 2> biex;    // Omega_{fp}
};
TransitionAmplitudes transition_amplitudes(const Pulse& p, const ExcitonStructure& s);

struct SignalParts {
    double esa{0.0};
    double se{0.0};
    double gsb{0.0};
    double total() const { return esa + se + gsb; }
};

// Population-only form: ESA positive, SE and GSB negative.
SignalParts perturbative_signal(const PulsePair& pair, const ExcitonStructure& s, const ReducedChi& chi);
// Full 16-element form.
SignalParts perturbative_signal(const PulsePair& pair, const ExcitonStructure& s, const FullChi& chi);

}  // namespace vdimer
