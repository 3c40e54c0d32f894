#pragma once

// Energy minimizers and their first variation.
//
// Without diffusion, the minimizer of the interaction energy under the
// piecewise-quadratic kernel is the unit-height indicator on [0,1].  With
// quadratic diffusion (m = 2, alpha = 1) the minimizer has the exponential
// form
//     mubar(x) = c1 * e^{x/s} + c2 * e^{-x/s} + 1   on [0, L],  s = sqrt(2 nu),
// with (c1, c2, L) fixed by three conditions: the first variation has zero
// slope on the support, the mass is one, and the density vanishes at L.
// This module evaluates those residuals in closed form, solves them by a
// damped Gauss-Newton continuation in nu, and evaluates the first-variation
// profile both by grid quadrature (any measure) and analytically (for the
// exponential ansatz, where quadrature error would mask the solver's
// accuracy).

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "agglab/measures.hpp"
#include "agglab/potentials.hpp"

namespace agglab {

struct DiffusiveEquilibrium {
    double nu = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double L = 0.0;
    double s() const;  // boundary-layer width sqrt(2 nu)
};

// First-variation profile: the energy felt per unit of test mass, sampled
// on a grid, with the multiplier estimated as the mass-weighted mean over
// the support.
struct LambdaProfile {
    Grid1D grid;
    std::vector<double> values;
    double multiplier = 0.0;
};

struct EquilibriumConvergenceError : std::runtime_error {
    double c1, c2, L, residual;
    EquilibriumConvergenceError(const std::string& msg, double c1_, double c2_, double L_,
                                double residual_)
        : std::runtime_error(msg), c1(c1_), c2(c2_), L(L_), residual(residual_) {}
};

struct EquilibriumConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Zero-diffusion minimizer: unit-height density on [0,1], on the default grid.
MixedMeasure plain_minimizer();

// Grid-sampled first variation
//     Lambda(x) = nu^alpha * m/(m-1) * rho(x)^(m-1) + (K * mu)(x)
// of an arbitrary measure (midpoint quadrature for the convolution).  For a
// purely atomic measure this requires nu = 0, since the diffusion term has
// no meaning at an atom.
LambdaProfile lambda_profile(const MixedMeasure& m, double nu, double alpha, double m_exp,
                             const PotentialSpec& spec);

// The three equilibrium conditions for the exponential ansatz, in closed
// form: r[0] the (constant) slope of the first variation, r[1] the mass
// defect, r[2] the density value at L.
std::array<double, 3> equilibrium_residuals(double c1, double c2, double L, double nu);

// Analytic Jacobian of equilibrium_residuals with respect to (c1, c2, L).
std::array<std::array<double, 3>, 3> equilibrium_jacobian(double c1, double c2, double L,
                                                          double nu);

struct EquilibriumGuess {
    double c1, c2, L;
};

// Independent closed-form construction of the root: at the solution the
// density also vanishes at x = 0, which reduces the three conditions to one
// scalar equation L - 2 s tanh(L / (2s)) = 1, solved by bisection.  Used as
// a starting guess and as a test oracle for the Gauss-Newton path.
DiffusiveEquilibrium closed_form_equilibrium(double nu);

// Damped Gauss-Newton solve of the three conditions (augmented with the
// vanishing-endpoint relation that the conditions imply, which removes a
// Jacobian degeneracy at the root), with row/column equilibration.  Without
// a guess, continuation from nu = 1e-1 in logarithmic steps warm-starts the
// iteration.  Throws EquilibriumConvergenceError after 100 iterations and
// EquilibriumConditioningError when the boundary layer is too thin for
// double precision (L/s > 690, reached below nu ~ 1e-6).
DiffusiveEquilibrium solve_equilibrium(double nu,
                                       const std::optional<EquilibriumGuess>& guess = std::nullopt);

// Exact cell averages of the ansatz density (via its antiderivative) on an
// arbitrary grid; cells beyond L are zero.
DensityField equilibrium_density(const DiffusiveEquilibrium& eq, const Grid1D& grid);

// Closed-form first variation of the ansatz under the piecewise-quadratic
// kernel, valid on and off the support; exact up to rounding, so it can
// verify solver output at tolerances far below grid quadrature error.
std::vector<double> lambda_values_analytic(const DiffusiveEquilibrium& eq,
                                           const std::vector<double>& xs);

// Multiplier of a converged equilibrium: the first variation evaluated at
// the middle of the support (constant across the support at a root).
double lambda_multiplier_analytic(const DiffusiveEquilibrium& eq);

}  // namespace agglab
