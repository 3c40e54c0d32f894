#pragma once

namespace agglab {

// Interaction potentials on the line: a Newtonian-repulsion/quadratic-attraction
// kernel with a kink at the origin, its C^2 polynomial regularization that
// replaces the kink inside |x| <= epsilon, and a zero kernel that switches
// interaction off entirely (useful for pure-diffusion runs and tests).
enum class PotentialKind {
    C0NewtonianQuadratic,
    C2Regularized,
    Zero,
};

struct PotentialSpec {
    PotentialKind kind = PotentialKind::C0NewtonianQuadratic;
    double epsilon = 0.1;  // regularization length; meaningful for C2Regularized only

    static PotentialSpec c0() { return {PotentialKind::C0NewtonianQuadratic, 0.1}; }
    static PotentialSpec c2(double eps = 0.1) { return {PotentialKind::C2Regularized, eps}; }
    static PotentialSpec zero() { return {PotentialKind::Zero, 0.1}; }
};

// K(x): even in x for both kinds.
double eval_K(const PotentialSpec& spec, double x) noexcept;

// Radius of the region around the origin outside which K(x) equals the
// plain kernel -|x|/2 + x^2/2 exactly: epsilon for the regularized kind,
// zero for the kinked one.
double inner_radius(const PotentialSpec& spec) noexcept;

// K'(x): odd in x; returns exactly 0 at x = 0 for both kinds (for the C0 kind
// this is the symmetric convention sign(0) := 0, so a particle exerts no force
// on itself).
double eval_dK(const PotentialSpec& spec, double x) noexcept;

// External potential hook. The evaluation contract exists so solvers and the
// energy module can carry a V-term, but every shipped configuration keeps it
// identically zero.
double eval_V(const PotentialSpec& spec, double x) noexcept;
double eval_dV(const PotentialSpec& spec, double x) noexcept;

}  // namespace agglab
