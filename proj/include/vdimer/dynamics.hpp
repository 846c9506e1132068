// dynamics.hpp - exact spectral propagation and the pulsed time-stepping integrator
#pragma once

#include "vdimer/model.hpp"
#include "vdimer/optics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vdimer {

// U = exp(-i H t); throws DomainError if H is not Hermitian to 1e-12.
Eigen::MatrixXcd exact_propagator(const Eigen::MatrixXcd& H, double t_fs);

// exp(-i H t) psi through the stored eigen-decomposition (site basis in and out).
Eigen::VectorXcd evolve_exact(const ExcitonStructure& s, const Eigen::VectorXcd& psi, double t_fs);

enum class Frame {
    lab,       // full midpoint exponential of H0 + V
    rotating,  // H0 phases exact, only the field term is stepped
};

struct PropagationPlan {
    double dt_fs{0.0};  // 0 selects (1/20) 2 pi / omega_max
    double t_start_fs{0.0};
    double t_end_fs{0.0};
    Frame frame{Frame::rotating};
    bool rwa{true};
};

// Largest frequency the stepper has to resolve in the chosen frame (rad/fs).
// Field-coupled eigenpairs count when their dipole element is at least 1e-2 of the largest one.
double retained_frequency(const ExcitonStructure& s, std::span<const Pulse> pulses, Frame frame, bool rwa);

// Fills an automatic dt, checks dt <= (1/20) 2 pi / omega_max (DomainError on violation) and
// moves t_end up to a whole number of steps.
PropagationPlan resolve_plan(PropagationPlan plan, const ExcitonStructure& s, std::span<const Pulse> pulses);

// Time stepper working on amplitudes in the eigenbasis of H0.
class Propagator {
public:
    using Observer = std::function<void(std::size_t step, double t, const Eigen::VectorXcd& c)>;

    Propagator(const ExcitonStructure& s, std::span<const Pulse> pulses, const PropagationPlan& plan);

    const PropagationPlan& plan() const noexcept { return plan_; }
    std::size_t steps() const noexcept { return steps_; }

    // Advances c (eigenbasis amplitudes) from t_start to t_end. The observer sees the state
    // at step 0 (t_start) and after each step. Throws IntegratorFailure on norm drift > 1e-6.
    void run(Eigen::VectorXcd& c, const Observer& observe = {}) const;

private:
    struct Drive {
        Pulse pulse;
        Eigen::MatrixXd up_eg;  // (1EM x ground) block of e.D
        Eigen::MatrixXd up_fe;  // (2EM x 1EM) block of e.D
    };

    // field blocks at one instant: eg = sum_k c_k up_eg, fe likewise; lowering parts are their adjoints
    void combine_field(std::span<const cplx> coeff, Eigen::MatrixXcd& eg, Eigen::MatrixXcd& fe) const;
    void apply_field(const Eigen::MatrixXcd& eg, const Eigen::MatrixXcd& fe, const Eigen::VectorXcd& x,
                     Eigen::VectorXcd& y) const;
    bool field_negligible(double t) const;

    const ExcitonStructure* s_;
    PropagationPlan plan_;
    std::size_t steps_{0};
    std::vector<Drive> drives_;
    std::vector<Eigen::Index> perm_;  // eigen indices, ground then 1EM then 2EM
    Eigen::Index ng_{0}, ne_{0}, nf_{0};
    double dmax_{0.0};
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXcd> states;  // site basis
};

Trajectory propagate(const Eigen::VectorXcd& psi, const ExcitonStructure& s, std::span<const Pulse> pulses,
                     const PropagationPlan& plan);

}  // namespace vdimer
