#include "vdimer/dynamics.hpp"
#include "vdimer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vdimer {

namespace {

constexpr int kMaxTaylorTerms = 60;

Eigen::MatrixXd dipole_norm(const ExcitonStructure& s) {
    return (s.dipole[0].array().square() + s.dipole[1].array().square() + s.dipole[2].array().square())
        .sqrt()
        .matrix();
}

Eigen::VectorXcd phases(const Eigen::VectorXd& lam, double t) {
    Eigen::VectorXcd p(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) p(k) = std::polar(1.0, -lam(k) * t);
    return p;
}

}  // namespace

Eigen::MatrixXcd exact_propagator(const Eigen::MatrixXcd& H, double t) {
    if (H.rows() != H.cols()) throw DomainError("exact_propagator: Hamiltonian must be square");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError("exact_propagator: Hamiltonian is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("exact_propagator: eigen decomposition failed");
    const Eigen::MatrixXcd& V = es.eigenvectors();
    return V * phases(es.eigenvalues(), t).asDiagonal() * V.adjoint();
}

Eigen::VectorXcd evolve_exact(const ExcitonStructure& s, const Eigen::VectorXcd& psi, double t) {
    if (psi.size() != s.vectors.rows()) throw DomainError("evolve_exact: dimension mismatch");
    Eigen::VectorXcd c = s.vectors.transpose().cast<cplx>() * psi;
    c = c.cwiseProduct(phases(s.energies, t));
    return s.vectors.cast<cplx>() * c;
}

double retained_frequency(const ExcitonStructure& s, std::span<const Pulse> pulses, Frame frame, bool rwa) {
    const Eigen::VectorXd& lam = s.energies;
    double wmax = 0.0;
    if (frame == Frame::lab) {
        wmax = lam.maxCoeff() - lam.minCoeff();
        for (const auto& p : pulses) wmax = std::max(wmax, p.omega());
        return wmax;
    }
    if (pulses.empty()) return 0.0;
    const Eigen::MatrixXd Dn = dipole_norm(s);
    const double cut = 1e-2 * Dn.maxCoeff();
    for (Eigen::Index k = 0; k < Dn.rows(); ++k) {
        for (Eigen::Index l = 0; l < Dn.cols(); ++l) {
            if (Dn(k, l) < cut || Dn(k, l) == 0.0) continue;
            const double bohr = lam(k) - lam(l);
            for (const auto& p : pulses) {
                wmax = std::max(wmax, std::abs(bohr - p.omega()));
                if (!rwa) wmax = std::max(wmax, std::abs(bohr + p.omega()));
            }
        }
    }
    return wmax;
}

PropagationPlan resolve_plan(PropagationPlan plan, const ExcitonStructure& s, std::span<const Pulse> pulses) {
    const double window = plan.t_end_fs - plan.t_start_fs;
    if (!(window > 0.0)) throw DomainError("PropagationPlan: t_end must exceed t_start");
    if (plan.dt_fs < 0.0) throw DomainError("PropagationPlan: dt must be positive");
    const double wmax = retained_frequency(s, pulses, plan.frame, plan.rwa);
    const double limit = wmax > 0.0 ? 2.0 * std::numbers::pi / wmax / 20.0 : std::numeric_limits<double>::infinity();
    double dt = plan.dt_fs;
    if (dt == 0.0) {
        dt = std::min(limit, plan.frame == Frame::lab ? 0.1 : 1.0);
    } else if (dt > limit * (1.0 + 1e-12)) {
        throw DomainError("PropagationPlan: dt = " + std::to_string(dt) + " fs exceeds (1/20) 2pi/omega_max = " +
                          std::to_string(limit) + " fs");
    }
    // Keep dt and extend the window to a whole number of steps, so runs sharing t_start and dt
    // share their time grid.
    const auto n = static_cast<std::size_t>(std::ceil(window / dt - 1e-9));
    plan.dt_fs = dt;
    plan.t_end_fs = plan.t_start_fs + static_cast<double>(std::max<std::size_t>(n, 1)) * dt;
    return plan;
}

Propagator::Propagator(const ExcitonStructure& s, std::span<const Pulse> pulses, const PropagationPlan& plan)
    : s_(&s), plan_(resolve_plan(plan, s, pulses)) {
    steps_ = static_cast<std::size_t>(std::llround((plan_.t_end_fs - plan_.t_start_fs) / plan_.dt_fs));
    std::vector<Eigen::Index> g, e, f;
    for (std::size_t k = 0; k < s.manifold.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        switch (s.manifold[k]) {
            case Manifold::ground: g.push_back(i); break;
            case Manifold::alpha:
            case Manifold::beta: e.push_back(i); break;
            case Manifold::biexciton: f.push_back(i); break;
        }
    }
    ng_ = static_cast<Eigen::Index>(g.size());
    ne_ = static_cast<Eigen::Index>(e.size());
    nf_ = static_cast<Eigen::Index>(f.size());
    // working order is [ground | 1EM | 2EM]
    perm_ = g;
    perm_.insert(perm_.end(), e.begin(), e.end());
    perm_.insert(perm_.end(), f.begin(), f.end());
    for (const auto& p : pulses) {
        p.validate();
        Eigen::MatrixXd De = p.polarization(0) * s.dipole[0] + p.polarization(1) * s.dipole[1] +
                             p.polarization(2) * s.dipole[2];
        Drive d{p, De(e, g), De(f, e)};
        dmax_ = std::max(dmax_, p.eta * std::max(d.up_eg.cwiseAbs().maxCoeff(), d.up_fe.cwiseAbs().maxCoeff()));
        drives_.push_back(std::move(d));
    }
}

bool Propagator::field_negligible(double t) const {
    double env = 0.0;
    for (const auto& d : drives_) {
        const double x = (t - d.pulse.t_center_fs) / d.pulse.sigma_fs;
        env = std::max(env, std::exp(-0.5 * x * x));
    }
    return env * dmax_ * plan_.dt_fs < 1e-18;
}

void Propagator::combine_field(std::span<const cplx> coeff, Eigen::MatrixXcd& eg, Eigen::MatrixXcd& fe) const {
    eg.noalias() = coeff[0] * drives_[0].up_eg;
    fe.noalias() = coeff[0] * drives_[0].up_fe;
    for (std::size_t k = 1; k < drives_.size(); ++k) {
        eg += coeff[k] * drives_[k].up_eg;
        fe += coeff[k] * drives_[k].up_fe;
    }
}

void Propagator::apply_field(const Eigen::MatrixXcd& eg, const Eigen::MatrixXcd& fe, const Eigen::VectorXcd& x,
                             Eigen::VectorXcd& y) const {
    auto xg = x.segment(0, ng_), xe = x.segment(ng_, ne_), xf = x.segment(ng_ + ne_, nf_);
    y.segment(0, ng_).noalias() = eg.adjoint() * xe;
    y.segment(ng_, ne_).noalias() = eg * xg;
    y.segment(ng_, ne_).noalias() += fe.adjoint() * xf;
    y.segment(ng_ + ne_, nf_).noalias() = fe * xe;
}

void Propagator::run(Eigen::VectorXcd& c, const Observer& observe) const {
    if (c.size() != s_->energies.size()) throw DomainError("Propagator: state dimension mismatch");
    const Eigen::VectorXd lam = s_->energies(perm_);
    const double dt = plan_.dt_fs;
    const double n0 = c.norm();
    const bool lab = plan_.frame == Frame::lab;
    const double shift = 0.5 * (lam.maxCoeff() + lam.minCoeff());
    const Eigen::VectorXd lam_shifted = lam.array() - shift;
    const Eigen::VectorXcd half = phases(lam, 0.5 * dt);
    const cplx global = std::polar(1.0, -shift * dt);

    Eigen::VectorXcd w = c(perm_);
    Eigen::VectorXcd term(w.size()), acc(w.size()), tmp(w.size());
    std::vector<cplx> coeff(drives_.size());
    Eigen::MatrixXcd eg, fe;
    auto report = [&](std::size_t k, double t) {
        c(perm_) = w;
        observe(k, t, c);
    };
    if (observe) report(0, plan_.t_start_fs);
    for (std::size_t k = 0; k < steps_; ++k) {
        const double tm = plan_.t_start_fs + (static_cast<double>(k) + 0.5) * dt;
        const bool quiet = drives_.empty() || field_negligible(tm);
        if (!quiet) {
            // -mu.E with the co-rotating term on the raising part
            for (std::size_t j = 0; j < drives_.size(); ++j) {
                coeff[j] = -drives_[j].pulse.eta * field_at(drives_[j].pulse, tm, plan_.rwa);
            }
            combine_field(coeff, eg, fe);
        }
        if (!lab) w.array() *= half.array();
        if (lab || !quiet) {
            term = w;
            acc = w;
            int n = 1;
            for (; n <= kMaxTaylorTerms; ++n) {
                if (quiet) {
                    tmp.setZero();
                } else {
                    apply_field(eg, fe, term, tmp);
                }
                if (lab) tmp.array() += lam_shifted.array() * term.array();
                term = tmp * cplx(0.0, -dt / n);
                acc += term;
                if (term.squaredNorm() <= 1e-34 * acc.squaredNorm()) break;
            }
            if (n > kMaxTaylorTerms) throw IntegratorFailure("Propagator: Taylor series did not converge");
            w.swap(acc);
        }
        if (lab) {
            w *= global;
        } else {
            w.array() *= half.array();
        }
        if (observe) report(k + 1, plan_.t_start_fs + static_cast<double>(k + 1) * dt);
    }
    c(perm_) = w;
    if (std::abs(c.norm() - n0) > 1e-6 * std::max(n0, 1e-300)) {
        throw IntegratorFailure("Propagator: norm drift exceeds 1e-6; reduce dt");
    }
}

Trajectory propagate(const Eigen::VectorXcd& psi, const ExcitonStructure& s, std::span<const Pulse> pulses,
                     const PropagationPlan& plan) {
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw DomainError("propagate: initial state must be normalized");
    const Propagator prop(s, pulses, plan);
    const Eigen::MatrixXcd V = s.vectors.cast<cplx>();
    Eigen::VectorXcd c = V.transpose() * psi;
    Trajectory tr;
    tr.t.reserve(prop.steps() + 1);
    tr.states.reserve(prop.steps() + 1);
    prop.run(c, [&](std::size_t, double t, const Eigen::VectorXcd& x) {
        tr.t.push_back(t);
        tr.states.push_back(V * x);
    });
    return tr;
}

}  // namespace vdimer
