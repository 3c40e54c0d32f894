#include "agglab/potentials.hpp"

#include <cmath>

namespace agglab {

double eval_K(const PotentialSpec& spec, double x) noexcept {
    if (spec.kind == PotentialKind::Zero) return 0.0;
    const double a = std::fabs(x);
    const double quad = 0.5 * x * x;
    if (spec.kind == PotentialKind::C2Regularized && a <= spec.epsilon) {
        const double e = spec.epsilon;
        const double x2 = x * x;
        return x2 * x2 / (16.0 * e * e * e) - 3.0 * x2 / (8.0 * e) - 3.0 * e / 16.0 + quad;
    }
    return -0.5 * a + quad;
}

double inner_radius(const PotentialSpec& spec) noexcept {
    return spec.kind == PotentialKind::C2Regularized ? spec.epsilon : 0.0;
}

double eval_dK(const PotentialSpec& spec, double x) noexcept {
    if (spec.kind == PotentialKind::Zero) return 0.0;
    if (spec.kind == PotentialKind::C2Regularized && std::fabs(x) <= spec.epsilon) {
        const double e = spec.epsilon;
        return x * x * x / (4.0 * e * e * e) - 3.0 * x / (4.0 * e) + x;
    }
    const double sgn = (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    return -0.5 * sgn + x;
}

double eval_V(const PotentialSpec&, double) noexcept { return 0.0; }

double eval_dV(const PotentialSpec&, double) noexcept { return 0.0; }

}  // namespace agglab
