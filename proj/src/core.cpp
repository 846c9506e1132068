#include "vdimer/core.hpp"
#include "vdimer/errors.hpp"

#include <algorithm>
#include <cmath>

namespace vdimer {

void DimerParams::validate() const {
    if (!(omega_a > 0.0) || !(omega_b > 0.0)) {
        throw DomainError("DimerParams: phonon frequencies must be positive");
    }
    if (mu_a.norm() == 0.0 || mu_b.norm() == 0.0) {
        throw DomainError("DimerParams: site dipoles must be nonzero");
    }
    for (double v : {eps_a, eps_b, J, g_a, g_b, delta_E}) {
        if (!std::isfinite(v)) throw DomainError("DimerParams: non-finite parameter");
    }
    if (!mu_a.allFinite() || !mu_b.allFinite()) {
        throw DomainError("DimerParams: non-finite dipole");
    }
}

DimerParams apc_preset() {
    DimerParams p;
    p.eps_a = 15300.0;
    p.eps_b = 16200.0;
    p.J = -162.0;
    p.omega_a = 800.0;
    p.omega_b = 1500.0;
    p.g_a = 0.1;
    p.g_b = 0.15;
    p.delta_E = 0.0;
    const double th = 40.0 * std::numbers::pi / 180.0;
    p.mu_a = Vec3::UnitX();
    p.mu_b = Vec3(std::cos(th), std::sin(th), 0.0);
    return p;
}

double coupling_ratio(const DimerParams& p) {
    const double s = p.omega_a + p.omega_b;
    if (!(s > 0.0)) throw DomainError("coupling_ratio: phonon frequency sum must be positive");
    return 2.0 * std::abs(p.J) / s;
}

double angle_between(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace vdimer
