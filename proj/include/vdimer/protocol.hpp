// protocol.hpp - pump-probe simulation, inversion to the reduced process tensor, ensembles
#pragma once

#include "vdimer/dynamics.hpp"
#include "vdimer/model.hpp"
#include "vdimer/optics.hpp"
#include "vdimer/process.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vdimer {

// arccos(1/sqrt(3))
inline const double kMagicAngle = std::acos(1.0 / std::sqrt(3.0));

struct SignalRecord {
    PairLabel label;
    double phase{0.0};
    std::uint64_t orientation{0};
    std::vector<double> t;
    std::vector<double> flux_absorption;  // -dP_g/dt
    std::vector<double> flux_emission;    // -dP_f/dt
    double S{0.0};                        // integral of absorption minus emission flux
};

// Fluxes and S for an arbitrary pulse list, starting from the true ground state.
SignalRecord simulate(const ExcitonStructure& s, std::span<const Pulse> pulses, const PropagationPlan& plan);

// Window [pump - 5 sigma, probe + 5 sigma]; dt and frame taken from plan.
SignalRecord simulate_pair(const PulsePair& pair, const ExcitonStructure& s, const PropagationPlan& plan,
                           std::uint64_t orientation = 0);

SignalRecord phase_average(const SignalRecord& a, const SignalRecord& b);
SignalRecord probe_only_subtract(const SignalRecord& full, const SignalRecord& probe_only);
// Same pointwise difference, for removing the pump's own linear response.
SignalRecord pump_only_subtract(const SignalRecord& full, const SignalRecord& pump_only);

struct InversionSystem {
    Eigen::Matrix4d M{Eigen::Matrix4d::Zero()};
    Eigen::Vector4d G{Eigen::Vector4d::Zero()};
    double kappa{0.0};  // 2-norm condition number
    double det{0.0};

    // |det M| / sigma_max^4
    double relative_det() const;
    void finalize();  // recompute kappa and det from M
};

// Rows follow kPairOrder; pairs[r].label must equal kPairOrder[r].
InversionSystem build_inversion(const std::array<PulsePair, 4>& pairs, const ExcitonStructure& s);

struct Recovery {
    ReducedChi chi;
    double residual{0.0};
};

// chi = M^-1 (S + G). Throws IllConditionedError when kappa > kappa_max.
Recovery recover_chi(const Eigen::Vector4d& S, const InversionSystem& sys, double kappa_max = 1e6, double tau = 0.0);

// Uniform rotation from the unit-quaternion method, stream (seed, sample).
Eigen::Matrix3d random_rotation(std::uint64_t seed, std::uint64_t sample);

struct PulseSettings {
    double sigma_fs{103.0};
    double depletion{1e-3};      // resonant, aligned ground depletion per pulse
    std::optional<double> eta;   // rad/fs per dipole unit, overrides depletion
    bool auto_resonant{true};
    double omega_plus_cm{0.0};   // used when auto_resonant is false
    double omega_minus_cm{0.0};
};

struct ProtocolSettings {
    DimerParams params;
    int n_phon{3};
    PulseSettings pulses;
    PropagationPlan plan;  // dt, frame, rwa; the window is set per run
    double kappa_max{1e6};
    bool require_isolated{false};
    unsigned threads{0};  // 0 = hardware concurrency
    std::size_t bootstrap{200};
    bool verbose{false};
};

// Pulse factory and simulation driver for one model.
class Experiment {
public:
    explicit Experiment(ProtocolSettings settings);

    const ProtocolSettings& settings() const noexcept { return set_; }
    const ExcitonStructure& structure() const noexcept { return s_; }
    double eta() const noexcept { return eta_; }
    double carrier_cm(Target t) const noexcept { return t == Target::plus ? w_plus_ : w_minus_; }
    double pump_center() const noexcept { return 5.0 * set_.pulses.sigma_fs; }
    double dt() const noexcept { return dt_; }

    // Lab-frame polarizations: pump along z, probe at the magic angle in the xz plane,
    // both mapped by R^T (equivalent to rotating the dimer by R).
    PulsePair make_pair(PairLabel label, double tau, const Eigen::Matrix3d& R = Eigen::Matrix3d::Identity(),
                        double probe_phase = 0.0) const;
    std::array<PulsePair, 4> make_pairs(double tau, const Eigen::Matrix3d& R = Eigen::Matrix3d::Identity()) const;

    PropagationPlan plan_for(double t_end) const;

    // Phase-averaged, probe-only and pump-only subtracted S for the four pairs.
    Eigen::Vector4d signals(double tau, const Eigen::Matrix3d& R = Eigen::Matrix3d::Identity(),
                            std::uint64_t orientation = 0) const;

private:
    ProtocolSettings set_;
    ExcitonStructure s_;
    double eta_{0.0};
    double w_plus_{0.0};
    double w_minus_{0.0};
    double dt_{0.0};
};

// Single dimer, identity orientation: "+" polarized perpendicular to mu_g,alpha and "-" perpendicular
// to mu_g,beta, each within the plane of the two exciton dipoles.
std::array<PulsePair, 4> polarization_selective_pairs(const Experiment& exp, double tau);

struct ChiStats {
    double tau{0.0};
    Eigen::Vector4d mean{Eigen::Vector4d::Zero()};
    Eigen::Vector4d std{Eigen::Vector4d::Zero()};
    double residual{0.0};
};

struct EnsembleResult {
    std::vector<ChiStats> chi;            // one per delay
    std::vector<Eigen::Vector4d> signal;  // averaged S per delay
    InversionSystem system;               // orientation-averaged
    std::vector<Eigen::Vector4d> per_orientation_invert;  // diagnostic mean per delay
    std::size_t N{0};
    std::uint64_t seed{0};
    bool random{true};
};

// N orientations (random when random=true, identity otherwise). Signals and Pi are averaged first,
// then inverted once; std from bootstrap resampling over orientations.
EnsembleResult ensemble_average(const Experiment& exp, std::span<const double> taus, std::size_t N,
                                std::uint64_t seed, bool random = true);

struct WitnessReport {
    WitnessPoint sim;
    WitnessPoint theory;
    std::array<ChiStats, 3> sim_chi;       // T1, T2, T1+T2
    std::array<ReducedChi, 3> theory_chi;
    EnsembleResult ensemble;
    int experiments_per_orientation{12};
};

WitnessReport run_witness_protocol(const Experiment& exp, double T1, double T2, std::size_t N, std::uint64_t seed,
                                   bool random = true);

// integral |chi_theo - chi_sim|^2 / integral |chi_theo|^2, trapezoidal on the delay grid
double deviation_sigma(std::span<const double> taus, std::span<const Eigen::Vector4d> theo,
                       std::span<const Eigen::Vector4d> sim);

struct RSweepPoint {
    double J{0.0};
    double r{0.0};
    double sigma{0.0};
};

// One phonon per site; ensemble pipeline against the oracle on the delay grid.
std::vector<RSweepPoint> r_sweep(const ProtocolSettings& base, std::span<const double> J_values,
                                 std::span<const double> taus, std::size_t N, std::uint64_t seed);

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace vdimer
