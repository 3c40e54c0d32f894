#pragma once

// Exact 2-Wasserstein distances between one-dimensional measures.
//
// Every distance here is computed in closed form: measures are reduced to
// piecewise-linear quantile functions and the squared distance is the exact
// integral of the squared quantile difference over the common breakpoint
// refinement.  No numerical quadrature is involved, so two implementations
// of the same distance agree to rounding.

#include <utility>
#include <vector>

#include "agglab/measures.hpp"

namespace agglab {

// Monotone rearrangement of a density onto a list of target atoms: cut
// positions partition the density's support so that consecutive slabs carry
// exactly the atom masses, in order.
struct PartitionPlan {
    std::vector<double> cuts;     // n + 1 positions, non-decreasing
    std::vector<double> targets;  // n atom locations, increasing
};

struct DensityToAtomsResult {
    double distance = 0.0;
    PartitionPlan plan;
};

// Distance from a nonnegative density to an atomic measure, with the
// transport plan that sends each density slab to its atom.  Both measures
// must carry equal total mass (tolerance 1e-12).
DensityToAtomsResult w2_density_to_atoms(const DensityField& rho, const ParticleEnsemble& mu);

// Distance between two arbitrary mixed measures of equal total mass via
// quantile functions.
double w2_mixed(const MixedMeasure& a, const MixedMeasure& b);

// Independent cross-check for equal-count, equal-weight atomic measures:
// sort both position lists and match rank to rank (optimal in one
// dimension because the optimal map is monotone).
double w2_discrete_oracle(const ParticleEnsemble& a, const ParticleEnsemble& b);

}  // namespace agglab
