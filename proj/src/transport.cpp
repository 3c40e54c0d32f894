#include "agglab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agglab {

namespace {

void require_equal_mass(double ma, double mb, const char* who) {
    if (std::abs(ma - mb) > 1e-12)
        throw std::invalid_argument(std::string(who) + ": total masses differ");
}

// Exact integral of (quantile_a - quantile_b)^2 du over the common
// breakpoint refinement.  Each refinement piece has both quantiles linear in
// u, so the integrand is quadratic and Simpson-exact:
//   integral over [u0,u1] = (u1-u0)/3 * (d0^2 + d0*d1 + d1^2),
// with d evaluated at the endpoints.
double w2_squared(const std::vector<detail::QuantileSegment>& A,
                  const std::vector<detail::QuantileSegment>& B) {
    double acc = 0.0;
    double u = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < A.size() && ib < B.size()) {
        const double hi = std::min(A[ia].u1, B[ib].u1);
        if (hi > u) {
            const double d0 = A[ia].x_at(u) - B[ib].x_at(u);
            const double d1 = A[ia].x_at(hi) - B[ib].x_at(hi);
            acc += (hi - u) / 3.0 * (d0 * d0 + d0 * d1 + d1 * d1);
            u = hi;
        }
        if (A[ia].u1 <= u) ++ia;
        while (ib < B.size() && B[ib].u1 <= u) ++ib;
    }
    return acc;
}

}  // namespace

double w2_mixed(const MixedMeasure& a, const MixedMeasure& b) {
    require_equal_mass(total_mass(a), total_mass(b), "w2_mixed");
    const auto segs_a = detail::quantile_segments(a);
    const auto segs_b = detail::quantile_segments(b);
    return std::sqrt(w2_squared(segs_a, segs_b));
}

DensityToAtomsResult w2_density_to_atoms(const DensityField& rho, const ParticleEnsemble& mu) {
    for (double v : rho.values)
        if (v < 0.0) throw std::invalid_argument("w2_density_to_atoms: negative density");
    require_equal_mass(rho.mass(), mu.mass(), "w2_density_to_atoms");

    // Merge coincident atoms so the cut sequence is strictly increasing.
    std::vector<Atom> atoms;
    atoms.reserve(mu.positions.size());
    for (std::size_t i = 0; i < mu.positions.size(); ++i)
        atoms.push_back({mu.positions[i], mu.weights[i]});
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& p, const Atom& q) { return p.location < q.location; });
    std::vector<Atom> merged;
    for (const Atom& a : atoms) {
        if (!merged.empty() && merged.back().location == a.location)
            merged.back().mass += a.mass;
        else
            merged.push_back(a);
    }

    MixedMeasure source = MixedMeasure::from_density(rho);
    DensityToAtomsResult res;
    res.plan.cuts.reserve(merged.size() + 1);
    res.plan.targets.reserve(merged.size());
    res.plan.cuts.push_back(quantile(source, 0.0));
    double cum = 0.0;
    const double total = rho.mass();
    for (const Atom& a : merged) {
        cum += a.mass;
        res.plan.cuts.push_back(quantile(source, std::min(cum / total, 1.0)));
        res.plan.targets.push_back(a.location);
    }

    // Exact per-cell integration of (y - x)^2 against the piecewise-constant
    // density over each slab [cut_i, cut_{i+1}].
    const Grid1D& g = rho.grid;
    double acc = 0.0;
    for (std::size_t k = 0; k < res.plan.targets.size(); ++k) {
        const double lo = res.plan.cuts[k];
        const double hi = res.plan.cuts[k + 1];
        const double y = res.plan.targets[k];
        if (hi <= lo) continue;
        const int i0 = std::max(0, static_cast<int>(std::floor((lo - g.left) / g.h())));
        for (int i = i0; i < g.n_cells; ++i) {
            const double a = std::max(lo, g.edge(i));
            const double b = std::min(hi, g.edge(i + 1));
            if (a >= hi) break;
            if (b <= a || rho.values[i] == 0.0) continue;
            const double ra = a - y, rb = b - y;
            acc += rho.values[i] * (rb * rb * rb - ra * ra * ra) / 3.0;
        }
    }
    res.distance = std::sqrt(acc);
    return res;
}

double w2_discrete_oracle(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    if (a.positions.size() != b.positions.size())
        throw std::invalid_argument("w2_discrete_oracle: particle counts differ");
    const std::size_t n = a.positions.size();
    if (n == 0) return 0.0;
    const double w = a.weights.front();
    for (double wa : a.weights)
        if (std::abs(wa - w) > 1e-15)
            throw std::invalid_argument("w2_discrete_oracle: non-uniform weights");
    for (double wb : b.weights)
        if (std::abs(wb - w) > 1e-15)
            throw std::invalid_argument("w2_discrete_oracle: non-uniform weights");

    std::vector<double> xs = a.positions, ys = b.positions;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - ys[i];
        acc += d * d;
    }
    return std::sqrt(w * acc);
}

}  // namespace agglab
