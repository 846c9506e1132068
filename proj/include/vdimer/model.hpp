// model.hpp - truncated vibronic basis, Frenkel-Holstein Hamiltonian, exciton structure
#pragma once

#include "vdimer/core.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace vdimer {

enum class Electronic : int { g = 0, a = 1, b = 2, f = 3 };

struct BasisLabel {
    Electronic el{Electronic::g};
    int n1{0};  // phonons on site a
    int n2{0};  // phonons on site b
};

// Electronic label (slowest) x phonon ladder a x phonon ladder b.
class HilbertSpace {
public:
    explicit HilbertSpace(int n_phon);

    int n_phon() const noexcept { return n_phon_; }
    int ladder() const noexcept { return n_phon_ + 1; }
    Eigen::Index dim() const noexcept { return 4 * ladder() * ladder(); }
    Eigen::Index bath_dim() const noexcept { return ladder() * ladder(); }

    Eigen::Index index(Electronic el, int n1, int n2) const;
    BasisLabel label(Eigen::Index k) const;

    // n_sites^2 * (n_phon+1)^n_sites, the size of the space of all excitations
    static std::uint64_t dimension(int n_sites, int n_phon);

private:
    int n_phon_;
};

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{1} << 31;  // bytes

// Throws ResourceError when one dense complex d x d matrix exceeds memory_cap.
HilbertSpace build_space(int n_phon, std::size_t memory_cap = kDefaultMemoryCap);

// All blocks in internal units (rad/fs).
struct VibronicHamiltonian {
    HilbertSpace space{0};
    Eigen::MatrixXcd H_S;
    Eigen::MatrixXcd H_B;
    Eigen::MatrixXcd H_SB;

    Eigen::MatrixXcd total() const { return H_S + H_B + H_SB; }
};

VibronicHamiltonian assemble(const DimerParams& params, const HilbertSpace& space);

// Diagonal of the electronic excitation number operator (0, 1, 1, 2 per label).
Eigen::VectorXd excitation_number(const HilbertSpace& space);

// Cartesian components of the raising part of the dipole operator, sum_i mu_i a_i^dag.
std::array<Eigen::MatrixXd, 3> raising_dipole(const DimerParams& params, const HilbertSpace& space);

// 2x2 electronic 1EM block [[eps_a, J], [J, eps_b]] in cm^-1.
Eigen::Matrix2d electronic_block(const DimerParams& params);

enum class Manifold { ground, alpha, beta, biexciton };

struct ExcitonStructure {
    HilbertSpace space{0};
    Eigen::VectorXd energies;  // rad/fs, ascending
    Eigen::MatrixXd vectors;   // columns, real orthonormal
    Eigen::VectorXd excitation;
    std::vector<Manifold> manifold;
    Eigen::VectorXd alpha_weight;  // weight on the alpha electronic eigenvector

    Eigen::Index g0{0}, a0{0}, b0{0}, f0{0};  // vibrationless states

    // Electronic 1EM eigenvectors over (a, b); alpha is the lower one.
    Eigen::Vector2d alpha;
    Eigen::Vector2d beta;
    double eps_alpha_cm{0.0};
    double eps_beta_cm{0.0};

    // Raising dipole components in the eigenbasis, dipole[c](k, l) = <k|mu_c|l>.
    std::array<Eigen::MatrixXd, 3> dipole;

    // Vibronic transition dipoles between vibrationless states.
    Vec3 mu_ga, mu_gb, mu_fa, mu_fb;
    // Site-dipole contractions with the electronic amplitudes.
    Vec3 mu_ga_el, mu_gb_el, mu_fa_el, mu_fb_el;

    double omega_ag() const { return energies(a0) - energies(g0); }
    double omega_bg() const { return energies(b0) - energies(g0); }
    double omega_fa() const { return energies(f0) - energies(a0); }
    double omega_fb() const { return energies(f0) - energies(b0); }

    std::vector<Eigen::Index> members(Manifold m) const;
};

// Throws AmbiguityError when the two vibrationless 1EM states are degenerate within 1e-9 cm^-1.
ExcitonStructure exciton_structure(const VibronicHamiltonian& H, const DimerParams& params);

// Convenience: assemble + diagonalize.
ExcitonStructure make_structure(const DimerParams& params, int n_phon);

}  // namespace vdimer
