#include "vdimer/model.hpp"
#include "vdimer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace vdimer {

HilbertSpace::HilbertSpace(int n_phon) : n_phon_(n_phon) {
    if (n_phon < 0) throw DomainError("HilbertSpace: n_phon must be >= 0");
}

Eigen::Index HilbertSpace::index(Electronic el, int n1, int n2) const {
    const int L = ladder();
    if (n1 < 0 || n1 >= L || n2 < 0 || n2 >= L) {
        throw DomainError("HilbertSpace::index: phonon occupancy out of range");
    }
    return (static_cast<Eigen::Index>(el) * L + n1) * L + n2;
}

BasisLabel HilbertSpace::label(Eigen::Index k) const {
    if (k < 0 || k >= dim()) throw DomainError("HilbertSpace::label: index out of range");
    const int L = ladder();
    const auto n2 = static_cast<int>(k % L);
    const auto n1 = static_cast<int>((k / L) % L);
    const auto el = static_cast<Electronic>(k / (L * L));
    return {el, n1, n2};
}

std::uint64_t HilbertSpace::dimension(int n_sites, int n_phon) {
    if (n_sites < 1 || n_phon < 0) throw DomainError("HilbertSpace::dimension: invalid arguments");
    std::uint64_t d = static_cast<std::uint64_t>(n_sites) * static_cast<std::uint64_t>(n_sites);
    for (int i = 0; i < n_sites; ++i) d *= static_cast<std::uint64_t>(n_phon + 1);
    return d;
}

HilbertSpace build_space(int n_phon, std::size_t memory_cap) {
    HilbertSpace s(n_phon);
    const double bytes = static_cast<double>(s.dim()) * static_cast<double>(s.dim()) * 16.0;
    if (bytes > static_cast<double>(memory_cap)) {
        throw ResourceError("build_space: d = " + std::to_string(s.dim()) +
                            " exceeds the configured memory cap");
    }
    return s;
}

Eigen::Matrix2d electronic_block(const DimerParams& p) {
    Eigen::Matrix2d m;
    m << p.eps_a, p.J, p.J, p.eps_b;
    return m;
}

VibronicHamiltonian assemble(const DimerParams& p, const HilbertSpace& space) {
    p.validate();
    const Eigen::Index d = space.dim();
    const int L = space.ladder();
    VibronicHamiltonian h{space, Eigen::MatrixXcd::Zero(d, d), Eigen::MatrixXcd::Zero(d, d),
                          Eigen::MatrixXcd::Zero(d, d)};

    const double ea = internal(p.eps_a), eb = internal(p.eps_b);
    const double ef = internal(p.eps_a + p.eps_b + p.delta_E);
    const double J = internal(p.J);
    const double wa = internal(p.omega_a), wb = internal(p.omega_b);

    for (int n1 = 0; n1 < L; ++n1) {
        for (int n2 = 0; n2 < L; ++n2) {
            const auto ia = space.index(Electronic::a, n1, n2);
            const auto ib = space.index(Electronic::b, n1, n2);
            h.H_S(ia, ia) = ea;
            h.H_S(ib, ib) = eb;
            h.H_S(space.index(Electronic::f, n1, n2), space.index(Electronic::f, n1, n2)) = ef;
            h.H_S(ia, ib) = J;
            h.H_S(ib, ia) = J;
            for (int e = 0; e < 4; ++e) {
                const auto k = space.index(static_cast<Electronic>(e), n1, n2);
                h.H_B(k, k) = wa * (n1 + 0.5) + wb * (n2 + 0.5);
            }
        }
    }

    // -omega_i g_i n_i (b_i + b_i^dag), truncated ladder
    const double ca = -wa * p.g_a, cb = -wb * p.g_b;
    for (Electronic el : {Electronic::a, Electronic::b, Electronic::f}) {
        const bool on_a = el == Electronic::a || el == Electronic::f;
        const bool on_b = el == Electronic::b || el == Electronic::f;
        for (int n1 = 0; n1 < L; ++n1) {
            for (int n2 = 0; n2 < L; ++n2) {
                const auto k = space.index(el, n1, n2);
                if (on_a && n1 + 1 < L) {
                    const auto up = space.index(el, n1 + 1, n2);
                    const double v = ca * std::sqrt(n1 + 1.0);
                    h.H_SB(up, k) = v;
                    h.H_SB(k, up) = v;
                }
                if (on_b && n2 + 1 < L) {
                    const auto up = space.index(el, n1, n2 + 1);
                    const double v = cb * std::sqrt(n2 + 1.0);
                    h.H_SB(up, k) = v;
                    h.H_SB(k, up) = v;
                }
            }
        }
    }
    return h;
}

Eigen::VectorXd excitation_number(const HilbertSpace& space) {
    Eigen::VectorXd n(space.dim());
    for (Eigen::Index k = 0; k < space.dim(); ++k) {
        switch (space.label(k).el) {
            case Electronic::g: n(k) = 0.0; break;
            case Electronic::a:
            case Electronic::b: n(k) = 1.0; break;
            case Electronic::f: n(k) = 2.0; break;
        }
    }
    return n;
}

std::array<Eigen::MatrixXd, 3> raising_dipole(const DimerParams& p, const HilbertSpace& space) {
    const Eigen::Index d = space.dim();
    const int L = space.ladder();
    const double s = p.statistics == ExcitonStatistics::fermion ? -1.0 : 1.0;
    std::array<Eigen::MatrixXd, 3> D;
    for (int c = 0; c < 3; ++c) {
        D[c] = Eigen::MatrixXd::Zero(d, d);
        for (int n1 = 0; n1 < L; ++n1) {
            for (int n2 = 0; n2 < L; ++n2) {
                const auto g = space.index(Electronic::g, n1, n2);
                const auto a = space.index(Electronic::a, n1, n2);
                const auto b = space.index(Electronic::b, n1, n2);
                const auto f = space.index(Electronic::f, n1, n2);
                D[c](a, g) = p.mu_a(c);      // a_a^dag |g>
                D[c](f, b) = p.mu_a(c);      // a_a^dag |b>
                D[c](b, g) = p.mu_b(c);      // a_b^dag |g>
                D[c](f, a) = s * p.mu_b(c);  // a_b^dag |a>
            }
        }
    }
    return D;
}

namespace {

Eigen::Index argmax_abs(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    return k;
}

// Ascending eigenvalues; near-degenerate groups ordered by the index of the largest component;
// each vector's largest component made positive.
void canonicalize(Eigen::VectorXd& w, Eigen::MatrixXd& V) {
    const Eigen::Index d = w.size();
    const double tol = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::vector<Eigen::Index> peak(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) peak[static_cast<std::size_t>(k)] = argmax_abs(V.col(k));
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        if (std::abs(w(i) - w(j)) > tol) return w(i) < w(j);
        return peak[static_cast<std::size_t>(i)] < peak[static_cast<std::size_t>(j)];
    });
    Eigen::VectorXd w2(d);
    Eigen::MatrixXd V2(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        w2(k) = w(src);
        V2.col(k) = V.col(src);
        if (V2(argmax_abs(V2.col(k)), k) < 0.0) V2.col(k) *= -1.0;
    }
    w = std::move(w2);
    V = std::move(V2);
}

Eigen::Vector2d fix_sign(Eigen::Vector2d v) {
    if (v(argmax_abs(v)) < 0.0) v = -v;
    return v;
}

}  // namespace

std::vector<Eigen::Index> ExcitonStructure::members(Manifold m) const {
    std::vector<Eigen::Index> out;
    for (std::size_t k = 0; k < manifold.size(); ++k) {
        if (manifold[k] == m) out.push_back(static_cast<Eigen::Index>(k));
    }
    return out;
}

ExcitonStructure exciton_structure(const VibronicHamiltonian& H, const DimerParams& params) {
    const HilbertSpace& space = H.space;
    const Eigen::MatrixXcd Hc = H.total();
    if (Hc.imag().cwiseAbs().maxCoeff() > 0.0) {
        throw DomainError("exciton_structure: complex couplings are not supported");
    }
    const Eigen::MatrixXd Hr = Hc.real();
    const Eigen::Index d = space.dim();
    const int L = space.ladder();
    const Eigen::VectorXd nexc = excitation_number(space);

    // H commutes with the excitation number, so each manifold is diagonalized on its own block.
    ExcitonStructure s;
    s.space = space;
    s.energies = Eigen::VectorXd::Zero(d);
    s.vectors = Eigen::MatrixXd::Zero(d, d);
    Eigen::Index col = 0;
    for (double n : {0.0, 1.0, 2.0}) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index k = 0; k < d; ++k) {
            if (nexc(k) == n) idx.push_back(k);
        }
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd block(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) block(i, j) = Hr(idx[i], idx[j]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("exciton_structure: eigen decomposition failed");
        }
        for (Eigen::Index j = 0; j < m; ++j, ++col) {
            s.energies(col) = solver.eigenvalues()(j);
            for (Eigen::Index i = 0; i < m; ++i) s.vectors(idx[i], col) = solver.eigenvectors()(i, j);
        }
    }
    canonicalize(s.energies, s.vectors);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> el(electronic_block(params));
    s.eps_alpha_cm = el.eigenvalues()(0);
    s.eps_beta_cm = el.eigenvalues()(1);
    s.alpha = fix_sign(el.eigenvectors().col(0));
    s.beta = fix_sign(el.eigenvectors().col(1));

    s.excitation = (s.vectors.array().square().colwise() * nexc.array()).colwise().sum().transpose();
    s.manifold.resize(static_cast<std::size_t>(d));
    s.alpha_weight = Eigen::VectorXd::Zero(d);

    for (Eigen::Index k = 0; k < d; ++k) {
        const double n = s.excitation(k);
        const double r = std::round(n);
        if (std::abs(n - r) > 1e-8) {
            throw NumericalError("exciton_structure: eigenstate mixes excitation manifolds");
        }
        if (r == 0.0) {
            s.manifold[static_cast<std::size_t>(k)] = Manifold::ground;
        } else if (r == 2.0) {
            s.manifold[static_cast<std::size_t>(k)] = Manifold::biexciton;
        } else {
            double wa = 0.0;
            for (int n1 = 0; n1 < L; ++n1) {
                for (int n2 = 0; n2 < L; ++n2) {
                    const double amp = s.alpha(0) * s.vectors(space.index(Electronic::a, n1, n2), k) +
                                       s.alpha(1) * s.vectors(space.index(Electronic::b, n1, n2), k);
                    wa += amp * amp;
                }
            }
            s.alpha_weight(k) = wa;
            if (std::abs(wa - 0.5) < 1e-12) {
                throw AmbiguityError("exciton_structure: eigenstate splits evenly between branches");
            }
            s.manifold[static_cast<std::size_t>(k)] = wa > 0.5 ? Manifold::alpha : Manifold::beta;
        }
    }

    auto lowest = [&](Manifold m) {
        const auto idx = s.members(m);
        if (idx.empty()) throw NumericalError("exciton_structure: empty manifold");
        return *std::min_element(idx.begin(), idx.end(),
                                 [&](Eigen::Index i, Eigen::Index j) { return s.energies(i) < s.energies(j); });
    };
    s.g0 = lowest(Manifold::ground);
    s.a0 = lowest(Manifold::alpha);
    s.b0 = lowest(Manifold::beta);
    s.f0 = lowest(Manifold::biexciton);
    if (std::abs(to_wavenumber({s.energies(s.a0) - s.energies(s.b0)}).cm) < 1e-9) {
        throw AmbiguityError("exciton_structure: alpha and beta vibrationless states are degenerate");
    }

    const auto D = raising_dipole(params, space);
    for (int c = 0; c < 3; ++c) {
        s.dipole[c] = s.vectors.transpose() * D[c] * s.vectors;
        s.mu_ga(c) = s.dipole[c](s.a0, s.g0);
        s.mu_gb(c) = s.dipole[c](s.b0, s.g0);
        s.mu_fa(c) = s.dipole[c](s.f0, s.a0);
        s.mu_fb(c) = s.dipole[c](s.f0, s.b0);
    }

    const double sign = params.statistics == ExcitonStatistics::fermion ? -1.0 : 1.0;
    auto ground_el = [&](const Eigen::Vector2d& x) -> Vec3 { return x(0) * params.mu_a + x(1) * params.mu_b; };
    auto biex_el = [&](const Eigen::Vector2d& x) -> Vec3 {
        return x(1) * params.mu_a + sign * x(0) * params.mu_b;
    };
    s.mu_ga_el = ground_el(s.alpha);
    s.mu_gb_el = ground_el(s.beta);
    s.mu_fa_el = biex_el(s.alpha);
    s.mu_fb_el = biex_el(s.beta);
    return s;
}

ExcitonStructure make_structure(const DimerParams& params, int n_phon) {
    return exciton_structure(assemble(params, build_space(n_phon)), params);
}

}  // namespace vdimer
