#include "vdimer/process.hpp"
#include "vdimer/dynamics.hpp"
#include "vdimer/errors.hpp"

#include <algorithm>
#include <cmath>

namespace vdimer {

namespace {

Eigen::VectorXcd phases(const Eigen::VectorXd& lam, double t) {
    Eigen::VectorXcd p(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) p(k) = std::polar(1.0, -lam(k) * t);
    return p;
}

void require_hermitian(const Eigen::MatrixXcd& m, const char* who) {
    if (m.rows() != m.cols()) throw DomainError(std::string(who) + ": matrix must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError(std::string(who) + ": matrix is not Hermitian");
    }
}

}  // namespace

ChiOracle::ChiOracle(ExcitonStructure s, BranchMeasure m) : s_(std::move(s)), measure_(m) {
    const HilbertSpace& sp = s_.space;
    for (int p = 0; p < 2; ++p) {
        const Eigen::Vector2d& x = p == alpha ? s_.alpha : s_.beta;
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(sp.dim());
        psi(sp.index(Electronic::a, 0, 0)) = x(0);
        psi(sp.index(Electronic::b, 0, 0)) = x(1);
        prepared_[static_cast<std::size_t>(p)] = s_.vectors.transpose().cast<cplx>() * psi;
    }
}

Eigen::VectorXcd ChiOracle::evolved(int p, double t) const {
    const Eigen::VectorXcd c = prepared_[static_cast<std::size_t>(p)].cwiseProduct(phases(s_.energies, t));
    return s_.vectors.cast<cplx>() * c;
}

Eigen::MatrixXcd ChiOracle::branch_amplitudes(const Eigen::VectorXcd& psi) const {
    const Eigen::Index nb = s_.space.bath_dim();
    const auto a = psi.segment(1 * nb, nb);
    const auto b = psi.segment(2 * nb, nb);
    Eigen::MatrixXcd A(2, nb);
    A.row(alpha) = (s_.alpha(0) * a + s_.alpha(1) * b).transpose();
    A.row(beta) = (s_.beta(0) * a + s_.beta(1) * b).transpose();
    return A;
}

ReducedChi ChiOracle::at(double t) const {
    if (t < 0.0) throw DomainError("theoretical_chi: times must be non-negative");
    ReducedChi r;
    r.tau = t;
    for (int p = 0; p < 2; ++p) {
        if (measure_ == BranchMeasure::electronic) {
            const Eigen::MatrixXcd A = branch_amplitudes(evolved(p, t));
            for (int q = 0; q < 2; ++q) r.v(2 * q + p) = A.row(q).squaredNorm();
        } else {
            const Eigen::VectorXcd c = prepared_[static_cast<std::size_t>(p)].cwiseProduct(phases(s_.energies, t));
            double pa = 0.0, pb = 0.0;
            for (std::size_t k = 0; k < s_.manifold.size(); ++k) {
                const double w = std::norm(c(static_cast<Eigen::Index>(k)));
                if (s_.manifold[k] == Manifold::alpha) pa += w;
                if (s_.manifold[k] == Manifold::beta) pb += w;
            }
            r.v(2 * alpha + p) = pa;
            r.v(2 * beta + p) = pb;
        }
    }
    return r;
}

FullChi ChiOracle::full_at(double t) const {
    if (t < 0.0) throw DomainError("theoretical_chi: times must be non-negative");
    if (measure_ != BranchMeasure::electronic) {
        throw DomainError("ChiOracle::full_at: coherences need the electronic measure");
    }
    const Eigen::MatrixXcd A0 = branch_amplitudes(evolved(alpha, t));
    const Eigen::MatrixXcd A1 = branch_amplitudes(evolved(beta, t));
    const Eigen::MatrixXcd* A[2] = {&A0, &A1};
    FullChi chi;
    chi.tau = t;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int p = 0; p < 2; ++p) {
                for (int q = 0; q < 2; ++q) {
                    // Tr_B <i| U |p><q| U^dag |j>
                    chi.at(i, j, p, q) = (A[p]->row(i).array() * A[q]->row(j).array().conjugate()).sum();
                }
            }
        }
    }
    return chi;
}

std::vector<ReducedChi> theoretical_chi(const DimerParams& params, const HilbertSpace& space,
                                        std::span<const double> times, BranchMeasure m) {
    for (double t : times) {
        if (t < 0.0) throw DomainError("theoretical_chi: times must be non-negative");
    }
    const ChiOracle oracle(exciton_structure(assemble(params, space), params), m);
    std::vector<ReducedChi> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(oracle.at(t));
    return out;
}

WitnessPoint witness_wb(const ReducedChi& c1, const ReducedChi& c2, const ReducedChi& ct) {
    if (std::abs(ct.tau - (c1.tau + c2.tau)) > 1e-9) {
        throw DomainError("witness_wb: tau must equal T1 + T2");
    }
    const double a1 = c1.aaaa(), a2 = c2.aaaa(), b2 = c2.bbbb();
    const double w = ct.aaaa() + a1 * (1.0 - a2) + (1.0 - a1) * b2 - 1.0;
    return {c1.tau, c2.tau, ct.tau, std::abs(w), w};
}

double witness_general(const FullChi& chi_tau, const FullChi& chi_T1, const FullChi& chi_T2,
                       const Eigen::Matrix2cd& rho, int i) {
    if (i != alpha && i != beta) throw DomainError("witness_general: measurement index must be alpha or beta");
    require_hermitian(rho, "witness_general");
    if (std::abs(rho.trace() - cplx(1.0)) > 1e-12) throw DomainError("witness_general: rho_P must have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("witness_general: rho_P is not positive");
    cplx w{0.0};
    for (int r = 0; r < 2; ++r) {
        for (int s = 0; s < 2; ++s) {
            cplx term = chi_tau.at(i, i, r, s);
            for (int p = 0; p < 2; ++p) term -= chi_T2.at(i, i, p, p) * chi_T1.at(p, p, r, s);
            w += term * rho(r, s);
        }
    }
    return std::abs(w);
}

double trace_norm(const Eigen::MatrixXcd& X) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X);
    return svd.singularValues().sum();
}

double coherence_measure(const Eigen::MatrixXcd& rho) {
    require_hermitian(rho, "coherence_measure");
    Eigen::MatrixXcd off = rho;
    off.diagonal().setZero();
    return 0.5 * trace_norm(off);
}

double coherence_lower_bound(double wb, double gamma, double drift) {
    if (wb < 0.0 || gamma < 0.0 || drift < 0.0) throw DomainError("coherence_lower_bound: inputs must be >= 0");
    return std::max(0.0, 2.0 * (wb - gamma - drift));
}

Eigen::MatrixXcd trace_out_bath(const Eigen::MatrixXcd& rho, const HilbertSpace& space) {
    const Eigen::Index nb = space.bath_dim();
    if (rho.rows() != space.dim() || rho.cols() != space.dim()) throw DomainError("trace_out_bath: dimension mismatch");
    Eigen::MatrixXcd out(4, 4);
    for (Eigen::Index e = 0; e < 4; ++e) {
        for (Eigen::Index f = 0; f < 4; ++f) out(e, f) = rho.block(e * nb, f * nb, nb, nb).trace();
    }
    return out;
}

Eigen::MatrixXcd trace_out_system(const Eigen::MatrixXcd& rho, const HilbertSpace& space) {
    const Eigen::Index nb = space.bath_dim();
    if (rho.rows() != space.dim() || rho.cols() != space.dim()) {
        throw DomainError("trace_out_system: dimension mismatch");
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nb, nb);
    for (Eigen::Index e = 0; e < 4; ++e) out += rho.block(e * nb, e * nb, nb, nb);
    return out;
}

Eigen::MatrixXcd product_state(const Eigen::MatrixXcd& rs, const Eigen::MatrixXcd& rb) {
    const Eigen::Index ns = rs.rows(), nb = rb.rows();
    Eigen::MatrixXcd out(ns * nb, ns * nb);
    for (Eigen::Index e = 0; e < ns; ++e) {
        for (Eigen::Index f = 0; f < ns; ++f) out.block(e * nb, f * nb, nb, nb) = rs(e, f) * rb;
    }
    return out;
}

double correlation_trace_norm(const Eigen::MatrixXcd& rho, const HilbertSpace& space) {
    return trace_norm(rho - product_state(trace_out_bath(rho, space), trace_out_system(rho, space)));
}

Eigen::Matrix2cd exciton_block(const Eigen::Matrix4cd& rho_el, const ExcitonStructure& s) {
    Eigen::Matrix2d X;
    X.col(0) = s.alpha;
    X.col(1) = s.beta;
    return X.transpose().cast<cplx>() * rho_el.block<2, 2>(1, 1) * X.cast<cplx>();
}

}  // namespace vdimer
