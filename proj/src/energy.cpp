#include "agglab/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace agglab {

namespace {

// Density-density pair energy by midpoint quadrature.  The kernel is even
// and translation-invariant, so K(c_i - c_j) depends only on i - j; one
// table of 2n-1 values turns the double sum into n contiguous dot products
// with a fixed (deterministic) summation order.
double density_density(const DensityField& rho, const PotentialSpec& spec) {
    const Grid1D& g = rho.grid;
    const int n = g.n_cells;
    const double h = g.h();
    std::vector<double> ktab(2 * n - 1);
    for (int d = -(n - 1); d <= n - 1; ++d) ktab[n - 1 + d] = eval_K(spec, d * h);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (rho.values[i] == 0.0) continue;
        const double* row = ktab.data() + (n - 1 - i);
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += row[j] * rho.values[j];
        acc += rho.values[i] * dot;
    }
    return 0.5 * h * h * acc;
}

}  // namespace

double interaction_energy(const MixedMeasure& m, const PotentialSpec& spec) {
    double atom_atom = 0.0;
    for (const Atom& a : m.atoms)
        for (const Atom& b : m.atoms) atom_atom += a.mass * b.mass * eval_K(spec, a.location - b.location);
    atom_atom *= 0.5;

    double cross = 0.0;
    double dd = 0.0;
    if (m.density) {
        const Grid1D& g = m.density->grid;
        const double h = g.h();
        for (const Atom& a : m.atoms) {
            double dot = 0.0;
            for (int j = 0; j < g.n_cells; ++j)
                dot += eval_K(spec, a.location - g.center(j)) * m.density->values[j];
            cross += a.mass * h * dot;
        }
        dd = density_density(*m.density, spec);
    }
    return atom_atom + cross + dd;
}

EnergyBreakdown diffusive_energy(const DensityField& rho, double nu, double alpha, double m_exp,
                                 const PotentialSpec& spec) {
    if (m_exp <= 1.0) throw std::domain_error("diffusive_energy: requires m_exp > 1");
    if (nu < 0.0) throw std::domain_error("diffusive_energy: requires nu >= 0");
    EnergyBreakdown e;
    e.interaction = interaction_energy(MixedMeasure::from_density(rho), spec);
    double pm = 0.0;
    if (m_exp == 2.0) {
        for (double v : rho.values) pm += v * v;
    } else {
        for (double v : rho.values)
            if (v > 0.0) pm += std::pow(v, m_exp);
    }
    e.entropy = std::pow(nu, alpha) / (m_exp - 1.0) * rho.grid.h() * pm;
    e.external = 0.0;
    e.total = e.interaction + e.entropy + e.external;
    return e;
}

}  // namespace agglab
