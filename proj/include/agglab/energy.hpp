#pragma once

// Interaction and diffusive energy functionals for mixed measures.
//
// The interaction energy is the symmetric pair energy
//     E[mu] = 1/2 * double integral of K(x - y) d mu(x) d mu(y),
// split into atom-atom, atom-density and density-density contributions.
// The diffusive energy adds the degenerate-diffusion term
//     nu^alpha / (m - 1) * integral of rho^m.
// Density integrals use midpoint (cell-center) quadrature, matching the
// cell-average representation used by the finite-volume solver.

#include "agglab/measures.hpp"
#include "agglab/potentials.hpp"

namespace agglab {

struct EnergyBreakdown {
    double interaction = 0.0;
    double entropy = 0.0;   // nonlinear-diffusion term, always >= 0
    double external = 0.0;  // confinement term, zero for the shipped potentials
    double total = 0.0;
};

// Pair energy of an arbitrary mixed measure.  The atom-atom double sum is
// inclusive of i == j, so an isolated atom contributes mass^2 * K(0) / 2
// (zero for the piecewise-quadratic kernel, a small negative constant for
// the smoothed kernel).
double interaction_energy(const MixedMeasure& m, const PotentialSpec& spec);

// Full energy of a density under diffusivity nu >= 0 with exponents alpha
// and m_exp > 1.  Throws std::domain_error for m_exp <= 1.
EnergyBreakdown diffusive_energy(const DensityField& rho, double nu, double alpha, double m_exp,
                                 const PotentialSpec& spec);

}  // namespace agglab
