// core.hpp - units, dimer parameters and the APC preset
#pragma once

#include <Eigen/Dense>

#include <numbers>

namespace vdimer {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 2.99792458e10;  // cm/s

// 1 cm^-1 expressed as an angular frequency in rad/fs (hbar = 1)
inline constexpr double kRadPerFsPerWavenumber = 2.0 * std::numbers::pi * kSpeedOfLight * 1e-15;

struct Wavenumber {
    double cm{0.0};  // cm^-1
};

struct AngularFrequency {
    double rad_per_fs{0.0};
};

// The only crossing point between API units (cm^-1) and internal units (rad/fs).
constexpr AngularFrequency to_angular(Wavenumber w) noexcept {
    return {w.cm * kRadPerFsPerWavenumber};
}
constexpr Wavenumber to_wavenumber(AngularFrequency w) noexcept {
    return {w.rad_per_fs / kRadPerFsPerWavenumber};
}
constexpr double internal(double cm) noexcept { return to_angular(Wavenumber{cm}).rad_per_fs; }

// Sign of <f| a_b^dag |a>. Fermionic ordering gives -1, hard-core bosons +1.
enum class ExcitonStatistics { fermion, paulion };

struct DimerParams {
    double eps_a{0.0};    // cm^-1
    double eps_b{0.0};
    double J{0.0};
    double omega_a{1.0};
    double omega_b{1.0};
    double g_a{0.0};      // dimensionless
    double g_b{0.0};
    double delta_E{0.0};  // biexciton shift, cm^-1
    Vec3 mu_a{Vec3::UnitX()};
    Vec3 mu_b{Vec3::UnitY()};
    ExcitonStatistics statistics{ExcitonStatistics::fermion};

    double huang_rhys_a() const noexcept { return g_a * g_a / 2.0; }
    double huang_rhys_b() const noexcept { return g_b * g_b / 2.0; }

    // Throws DomainError when an invariant is broken.
    void validate() const;
};

constexpr double huang_rhys(double g) noexcept { return g * g / 2.0; }

// Allophycocyanin dimer: site dipoles unit length, 40 degrees apart in the xy plane.
DimerParams apc_preset();

// r = 2|J| / (omega_a + omega_b)
double coupling_ratio(const DimerParams& p);

// Angle in degrees.
double angle_between(const Vec3& a, const Vec3& b);

}  // namespace vdimer
