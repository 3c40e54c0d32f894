#include "agglab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace agglab {

bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.left == b.left && a.right == b.right && a.n_cells == b.n_cells;
}

double DensityField::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.h();
}

double ParticleEnsemble::mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

MixedMeasure MixedMeasure::from_density(DensityField rho) {
    MixedMeasure m;
    m.density = std::move(rho);
    return m;
}

MixedMeasure MixedMeasure::from_atoms(std::vector<Atom> atoms) {
    MixedMeasure m;
    m.atoms = std::move(atoms);
    return m;
}

MixedMeasure MixedMeasure::from_particles(const ParticleEnsemble& e) {
    MixedMeasure m;
    m.atoms.reserve(e.positions.size());
    for (std::size_t i = 0; i < e.positions.size(); ++i)
        m.atoms.push_back({e.positions[i], e.weights[i]});
    return m;
}

double total_mass(const MixedMeasure& m) {
    double s = 0.0;
    for (const Atom& a : m.atoms) s += a.mass;
    if (m.density) s += m.density->mass();
    return s;
}

double cdf(const MixedMeasure& m, double x) {
    double s = 0.0;
    for (const Atom& a : m.atoms)
        if (a.location <= x) s += a.mass;
    if (m.density) {
        const Grid1D& g = m.density->grid;
        const double h = g.h();
        for (int i = 0; i < g.n_cells; ++i) {
            const double v = m.density->values[i];
            if (v == 0.0) continue;
            const double overlap = std::min(x, g.edge(i + 1)) - g.edge(i);
            if (overlap <= 0.0) break;
            s += v * std::min(overlap, h);
        }
    }
    return s;
}

namespace detail {

namespace {

std::vector<Atom> sorted_merged_atoms(const std::vector<Atom>& atoms) {
    std::vector<Atom> sorted = atoms;
    std::sort(sorted.begin(), sorted.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::vector<Atom> merged;
    for (const Atom& a : sorted) {
        if (!merged.empty() && merged.back().location == a.location)
            merged.back().mass += a.mass;
        else
            merged.push_back(a);
    }
    return merged;
}

}  // namespace

std::vector<QuantileSegment> quantile_segments(const MixedMeasure& m) {
    const std::vector<Atom> atoms = sorted_merged_atoms(m.atoms);
    std::vector<QuantileSegment> segs;
    double cum = 0.0;
    std::size_t ai = 0;

    auto push_atom = [&](const Atom& a) {
        segs.push_back({cum, cum + a.mass, a.location, a.location});
        cum += a.mass;
    };
    auto push_cell = [&](double x0, double x1, double mass) {
        if (mass > 0.0) {
            segs.push_back({cum, cum + mass, x0, x1});
            cum += mass;
        }
    };

    if (m.density) {
        const Grid1D& g = m.density->grid;
        const double h = g.h();
        for (int i = 0; i < g.n_cells; ++i) {
            const double xl = g.edge(i);
            const double xr = g.edge(i + 1);
            while (ai < atoms.size() && atoms[ai].location <= xl) push_atom(atoms[ai++]);
            const double v = m.density->values[i];
            if (v <= 0.0) continue;
            double start = xl;
            while (ai < atoms.size() && atoms[ai].location < xr) {
                const double y = atoms[ai].location;
                push_cell(start, y, v * (y - start));
                push_atom(atoms[ai++]);
                start = y;
            }
            push_cell(start, xr, v * (xr - start));
        }
    }
    while (ai < atoms.size()) push_atom(atoms[ai++]);
    return segs;
}

}  // namespace detail

double quantile(const MixedMeasure& m, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("quantile: u outside [0, 1]");
    const std::vector<detail::QuantileSegment> segs = detail::quantile_segments(m);
    if (segs.empty()) throw std::domain_error("quantile: empty measure");
    if (u <= segs.front().u0) return segs.front().x0;  // u = 0: support infimum
    // First segment whose upper mass covers u; left-continuity means a u that
    // lands exactly on a shared breakpoint belongs to the earlier segment.
    auto it = std::lower_bound(segs.begin(), segs.end(), u,
                               [](const detail::QuantileSegment& s, double uu) { return s.u1 < uu; });
    if (it == segs.end()) return segs.back().x1;
    return it->x_at(u);
}

DensityField indicator_density(double a, double b, double height, const Grid1D& grid) {
    if (!(grid.left <= a && a < b && b <= grid.right))
        throw std::domain_error("indicator_density: need left <= a < b <= right");
    DensityField rho{grid, std::vector<double>(grid.n_cells, 0.0)};
    const double h = grid.h();
    for (int i = 0; i < grid.n_cells; ++i) {
        const double lo = std::max(a, grid.edge(i));
        const double hi = std::min(b, grid.edge(i + 1));
        if (hi > lo) rho.values[i] = height * (hi - lo) / h;
    }
    return rho;
}

double moment(const MixedMeasure& m, int order) {
    auto powk = [order](double x) {
        double p = 1.0;
        for (int k = 0; k < order; ++k) p *= x;
        return p;
    };
    double s = 0.0;
    for (const Atom& a : m.atoms) s += a.mass * powk(a.location);
    if (m.density) {
        const Grid1D& g = m.density->grid;
        double acc = 0.0;
        for (int i = 0; i < g.n_cells; ++i) acc += m.density->values[i] * powk(g.center(i));
        s += acc * g.h();
    }
    return s;
}

DensityField initial_density(const Grid1D& grid) {
    // 4 * 1_{[0, 0.25]}: assign by cell-center membership so the represented
    // cells carry exactly the nominal height (0.25 is a cell edge on any grid
    // whose resolution divides it; center membership keeps that exact).
    DensityField rho{grid, std::vector<double>(grid.n_cells, 0.0)};
    for (int i = 0; i < grid.n_cells; ++i)
        if (grid.center(i) < 0.25) rho.values[i] = 4.0;
    return rho;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_measure_csv(const MixedMeasure& m, std::ostream& out) {
    if (m.density) {
        const Grid1D& g = m.density->grid;
        for (int i = 0; i < g.n_cells; ++i)
            out << fmt17(g.center(i)) << ',' << fmt17(m.density->values[i]) << '\n';
    }
    for (const Atom& a : m.atoms)
        out << "!atom," << fmt17(a.location) << ',' << fmt17(a.mass) << '\n';
}

MixedMeasure load_measure_csv(std::istream& in) {
    MixedMeasure m;
    std::vector<double> xs, vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("!atom,", 0) == 0) {
            const std::size_t c = line.find(',', 6);
            if (c == std::string::npos) throw std::runtime_error("measure csv: bad atom row");
            m.atoms.push_back({std::stod(line.substr(6, c - 6)), std::stod(line.substr(c + 1))});
        } else {
            const std::size_t c = line.find(',');
            if (c == std::string::npos) throw std::runtime_error("measure csv: bad density row");
            xs.push_back(std::stod(line.substr(0, c)));
            vals.push_back(std::stod(line.substr(c + 1)));
        }
    }
    if (!xs.empty()) {
        if (xs.size() < 2) throw std::runtime_error("measure csv: density needs >= 2 cells");
        const double h = xs[1] - xs[0];
        Grid1D g{xs.front() - 0.5 * h, xs.back() + 0.5 * h, static_cast<int>(xs.size())};
        m.density = DensityField{g, std::move(vals)};
    }
    return m;
}

void save_measure_csv(const MixedMeasure& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_measure_csv(m, out);
}

MixedMeasure load_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return load_measure_csv(in);
}

}  // namespace agglab
