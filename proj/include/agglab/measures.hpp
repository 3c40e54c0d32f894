#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace agglab {

// Uniform cell grid on [left, right]; cell i covers [edge(i), edge(i+1)] with
// center left + (i + 1/2) h.
struct Grid1D {
    double left = 0.0;
    double right = 1.5;
    int n_cells = 1500;

    double h() const { return (right - left) / n_cells; }
    double center(int i) const { return left + (i + 0.5) * h(); }
    double edge(int i) const { return left + i * h(); }

    // Domain and resolution used throughout: [0, 1.5] with h = 1e-3, fine
    // enough that the reported-table comparisons are not discretization-bound.
    static Grid1D defaults() { return Grid1D{0.0, 1.5, 1500}; }
};

bool operator==(const Grid1D& a, const Grid1D& b);

// Cell-averaged nonnegative density.
struct DensityField {
    Grid1D grid;
    std::vector<double> values;  // one per cell, >= 0

    double mass() const;
};

// Weighted Dirac ensemble; positions kept sorted.
struct ParticleEnsemble {
    std::vector<double> positions;
    std::vector<double> weights;  // each > 0

    double mass() const;
};

struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

// Atoms plus an optional density part: the universal measure representation.
struct MixedMeasure {
    std::vector<Atom> atoms;
    std::optional<DensityField> density;

    static MixedMeasure from_density(DensityField rho);
    static MixedMeasure from_atoms(std::vector<Atom> atoms);
    static MixedMeasure from_particles(const ParticleEnsemble& e);
};

double total_mass(const MixedMeasure& m);

// Right-continuous CDF; an atom sitting exactly at x is included in cdf(x).
double cdf(const MixedMeasure& m, double x);

// Left-continuous generalized inverse of the CDF, inf{x : cdf(x) >= u};
// linear across density cells, constant across atoms. quantile(0) is the
// infimum of the support (not the domain edge), so transport distances
// ignore empty regions. Requires total mass 1; throws std::domain_error for
// u outside [0, 1].
double quantile(const MixedMeasure& m, double u);

// height * 1_{[a,b]} sampled as exact cell averages.
// Throws std::domain_error unless left <= a < b <= right.
DensityField indicator_density(double a, double b, double height, const Grid1D& grid);

// k-th raw moment (integral of x^k) by cell-center quadrature plus atom sums.
double moment(const MixedMeasure& m, int order);

// The initial datum used by every shipped experiment: 4 * 1_{[0, 0.25]}.
DensityField initial_density(const Grid1D& grid = Grid1D::defaults());

// CSV serialization: density rows "x,rho" (every cell, 17 significant digits
// so loading reproduces the doubles bit-exactly), atom rows
// "!atom,location,mass". The loader rebuilds the grid from the cell centers.
void save_measure_csv(const MixedMeasure& m, std::ostream& out);
MixedMeasure load_measure_csv(std::istream& in);
void save_measure_csv(const MixedMeasure& m, const std::string& path);
MixedMeasure load_measure_csv(const std::string& path);

namespace detail {

// One piece of a quantile function: u in [u0, u1] maps linearly to [x0, x1].
// Atom pieces have x0 == x1. Pieces tile (0, total mass] in u.
struct QuantileSegment {
    double u0, u1;
    double x0, x1;

    double x_at(double u) const {
        if (u1 == u0) return x0;
        const double w = (u - u0) / (u1 - u0);
        return x0 + w * (x1 - x0);
    }
};

// Builds the piecewise-linear quantile representation by walking cells and
// atoms in position order (atoms merged at equal locations; an atom exactly
// on a cell edge is placed between the two cells' mass).
std::vector<QuantileSegment> quantile_segments(const MixedMeasure& m);

}  // namespace detail

}  // namespace agglab
