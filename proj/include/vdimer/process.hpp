// process.hpp - oracle process tensor, NSIT witness, coherence measure, partial traces
#pragma once

#include "vdimer/model.hpp"
#include "vdimer/optics.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace vdimer {

// How the population of exciton branch q is read out.
enum class BranchMeasure {
    electronic,  // |q><q| (x) I_B on the electronic exciton vector
    eigenstate,  // eigenstates of H whose electronic character is mostly q
};

// Perfect preparation of |p> (x) |0,0> and perfect measurement, evolved exactly.
class ChiOracle {
public:
    explicit ChiOracle(ExcitonStructure s, BranchMeasure m = BranchMeasure::electronic);

    const ExcitonStructure& structure() const noexcept { return s_; }
    ReducedChi at(double t_fs) const;
    FullChi full_at(double t_fs) const;  // electronic measure only
    // Joint state after preparing branch p and evolving for t (site basis).
    Eigen::VectorXcd evolved(int p, double t_fs) const;

private:
    // amplitudes <q, n1, n2| psi> for q in {alpha, beta}, as (2 x bath_dim)
    Eigen::MatrixXcd branch_amplitudes(const Eigen::VectorXcd& psi) const;

    ExcitonStructure s_;
    BranchMeasure measure_;
    std::array<Eigen::VectorXcd, 2> prepared_;  // eigenbasis coefficients
};

std::vector<ReducedChi> theoretical_chi(const DimerParams& params, const HilbertSpace& space,
                                        std::span<const double> times,
                                        BranchMeasure m = BranchMeasure::electronic);

struct WitnessPoint {
    double T1{0.0};
    double T2{0.0};
    double tau{0.0};
    double value{0.0};   // |signed|
    double signed_value{0.0};
};

// Dimer form. Requires chi_tau.tau == chi_T1.tau + chi_T2.tau within 1e-9 fs.
WitnessPoint witness_wb(const ReducedChi& chi_T1, const ReducedChi& chi_T2, const ReducedChi& chi_tau);

// Double-sum form for initial state rho_P (2x2 over alpha, beta) and final projector onto branch i.
double witness_general(const FullChi& chi_tau, const FullChi& chi_T1, const FullChi& chi_T2,
                       const Eigen::Matrix2cd& rho_P, int i = alpha);

// Half the trace norm of the off-diagonal part.
double coherence_measure(const Eigen::MatrixXcd& rho);

// 2 (wb - gamma - drift), clamped at 0.
double coherence_lower_bound(double wb, double gamma_trace_norm, double bath_drift_trace_norm);

double trace_norm(const Eigen::MatrixXcd& X);

// Reduced electronic state (4x4 over g, a, b, f).
Eigen::MatrixXcd trace_out_bath(const Eigen::MatrixXcd& rho, const HilbertSpace& space);
// Reduced phonon state ((n+1)^2 square).
Eigen::MatrixXcd trace_out_system(const Eigen::MatrixXcd& rho, const HilbertSpace& space);
// rho_S (x) rho_B in the space's index order.
Eigen::MatrixXcd product_state(const Eigen::MatrixXcd& rho_S, const Eigen::MatrixXcd& rho_B);
// || rho - rho_S (x) rho_B ||_tr
double correlation_trace_norm(const Eigen::MatrixXcd& rho, const HilbertSpace& space);
// 2x2 exciton-basis block of a reduced electronic state.
Eigen::Matrix2cd exciton_block(const Eigen::Matrix4cd& rho_el, const ExcitonStructure& s);

}  // namespace vdimer
