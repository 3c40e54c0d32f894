#include "agglab/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace agglab {

double DiffusiveEquilibrium::s() const { return std::sqrt(2.0 * nu); }

MixedMeasure plain_minimizer() {
    return MixedMeasure::from_density(indicator_density(0.0, 1.0, 1.0, Grid1D::defaults()));
}

LambdaProfile lambda_profile(const MixedMeasure& m, double nu, double alpha, double m_exp,
                             const PotentialSpec& spec) {
    if (!m.density) {
        if (nu > 0.0)
            throw std::domain_error("lambda_profile: diffusion term undefined for atomic measures");
        if (m.atoms.empty()) throw std::domain_error("lambda_profile: empty measure");
    }
    if (nu > 0.0 && m_exp <= 1.0) throw std::domain_error("lambda_profile: requires m_exp > 1");

    const Grid1D grid = m.density ? m.density->grid : Grid1D::defaults();
    const double h = grid.h();
    const double diff_coeff = nu > 0.0 ? std::pow(nu, alpha) * m_exp / (m_exp - 1.0) : 0.0;

    LambdaProfile prof;
    prof.grid = grid;
    prof.values.resize(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) {
        const double x = grid.center(i);
        double conv = 0.0;
        if (m.density)
            for (int j = 0; j < grid.n_cells; ++j)
                conv += eval_K(spec, x - grid.center(j)) * m.density->values[j];
        double lam = h * conv;
        for (const Atom& a : m.atoms) lam += a.mass * eval_K(spec, x - a.location);
        if (diff_coeff != 0.0 && m.density) {
            const double rho = m.density->values[i];
            lam += diff_coeff * (m_exp == 2.0 ? rho : (rho > 0.0 ? std::pow(rho, m_exp - 1.0) : 0.0));
        }
        prof.values[i] = lam;
    }

    // Multiplier: mass-weighted mean over the support.  With a density part
    // the support is the set of strictly positive cells; for purely atomic
    // measures the profile is evaluated at the atoms themselves.
    double wsum = 0.0, lsum = 0.0;
    if (m.density) {
        for (int i = 0; i < grid.n_cells; ++i) {
            const double w = h * m.density->values[i];
            if (m.density->values[i] > 0.0) {
                wsum += w;
                lsum += w * prof.values[i];
            }
        }
    } else {
        for (const Atom& a : m.atoms) {
            double lam = 0.0;
            for (const Atom& b : m.atoms) lam += b.mass * eval_K(spec, a.location - b.location);
            wsum += a.mass;
            lsum += a.mass * lam;
        }
    }
    prof.multiplier = wsum > 0.0 ? lsum / wsum : 0.0;
    return prof;
}

namespace {

// Exponentials and partial moments of the ansatz over [0, L]:
//   mass  M0 = c1 s (E-1) - c2 s (Em-1) + L
//   first moment M1 = c1 (s L E - s^2 E + s^2) + c2 (-s L Em - s^2 Em + s^2) + L^2/2
// with E = e^{L/s}, Em = e^{-L/s}.
struct AnsatzTerms {
    double s, E, Em, M0, M1;
};

AnsatzTerms ansatz_terms(double c1, double c2, double L, double nu) {
    AnsatzTerms t;
    t.s = std::sqrt(2.0 * nu);
    t.E = std::exp(L / t.s);
    t.Em = std::exp(-L / t.s);
    const double s = t.s;
    t.M0 = c1 * s * (t.E - 1.0) - c2 * s * (t.Em - 1.0) + L;
    t.M1 = c1 * (s * L * t.E - s * s * t.E + s * s) +
           c2 * (-s * L * t.Em - s * s * t.Em + s * s) + 0.5 * L * L;
    return t;
}

void require_resolvable(double L, double s) {
    if (!(L / s <= 690.0))
        throw EquilibriumConditioningError(
            "equilibrium solve: boundary layer below double-precision resolution (L/s > 690)");
}

}  // namespace

std::array<double, 3> equilibrium_residuals(double c1, double c2, double L, double nu) {
    if (!(nu > 0.0)) throw std::domain_error("equilibrium_residuals: requires nu > 0");
    if (!(L > 0.0)) throw std::domain_error("equilibrium_residuals: requires L > 0");
    require_resolvable(L, std::sqrt(2.0 * nu));
    const AnsatzTerms t = ansatz_terms(c1, c2, L, nu);
    // The first variation of the ansatz has identically zero curvature, so
    // its slope is the same at every point of [0, L]; evaluated at 0 it is
    //   s (c1 - c2) + 1/2 - M1.
    const double r1 = t.s * (c1 - c2) + 0.5 - t.M1;
    const double r2 = t.M0 - 1.0;
    const double r3 = c1 * t.E + c2 * t.Em + 1.0;
    return {r1, r2, r3};
}

std::array<std::array<double, 3>, 3> equilibrium_jacobian(double c1, double c2, double L,
                                                          double nu) {
    const AnsatzTerms t = ansatz_terms(c1, c2, L, nu);
    const double s = t.s, E = t.E, Em = t.Em;
    const double dM1_dc1 = s * L * E - s * s * E + s * s;
    const double dM1_dc2 = -s * L * Em - s * s * Em + s * s;
    const double endpoint = c1 * E + c2 * Em + 1.0;  // ansatz value at L
    std::array<std::array<double, 3>, 3> J;
    J[0] = {s - dM1_dc1, -s - dM1_dc2, -L * endpoint};
    J[1] = {s * (E - 1.0), -s * (Em - 1.0), endpoint};
    J[2] = {E, Em, (c1 * E - c2 * Em) / s};
    return J;
}

DiffusiveEquilibrium closed_form_equilibrium(double nu) {
    if (!(nu > 0.0)) throw std::domain_error("closed_form_equilibrium: requires nu > 0");
    const double s = std::sqrt(2.0 * nu);
    // f(L) = L - 2 s tanh(L/(2s)) - 1 is increasing with a sign change on
    // (1, 1 + 2s]: bisection to machine precision.
    double lo = 1.0, hi = 1.0 + 2.0 * s;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = mid - 2.0 * s * std::tanh(mid / (2.0 * s)) - 1.0;
        (f < 0.0 ? lo : hi) = mid;
    }
    const double L = 0.5 * (lo + hi);
    require_resolvable(L, s);
    const double Em = std::exp(-L / s);
    DiffusiveEquilibrium eq;
    eq.nu = nu;
    eq.c1 = -Em / (1.0 + Em);
    eq.c2 = -1.0 / (1.0 + Em);
    eq.L = L;
    return eq;
}

namespace {

// Least squares for the 4x3 Gauss-Newton system by Householder QR with row
// and column equilibration (the Jacobian columns span ~100 orders of
// magnitude once the boundary layer sharpens).
std::array<double, 3> equilibrated_lstsq(std::array<std::array<double, 3>, 4> A,
                                         std::array<double, 4> b) {
    std::array<double, 4> rs{};
    for (int i = 0; i < 4; ++i) {
        double m = 0.0;
        for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(A[i][j]));
        rs[i] = m > 0.0 ? 1.0 / m : 1.0;
        for (int j = 0; j < 3; ++j) A[i][j] *= rs[i];
        b[i] *= rs[i];
    }
    std::array<double, 3> cs{};
    for (int j = 0; j < 3; ++j) {
        double m = 0.0;
        for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(A[i][j]));
        cs[j] = m > 0.0 ? 1.0 / m : 1.0;
        for (int i = 0; i < 4; ++i) A[i][j] *= cs[j];
    }
    // Householder triangularization of the scaled 4x3 system.
    for (int k = 0; k < 3; ++k) {
        double norm = 0.0;
        for (int i = k; i < 4; ++i) norm += A[i][k] * A[i][k];
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        if (A[k][k] > 0.0) norm = -norm;
        std::array<double, 4> v{};
        for (int i = k; i < 4; ++i) v[i] = A[i][k];
        v[k] -= norm;
        double vtv = 0.0;
        for (int i = k; i < 4; ++i) vtv += v[i] * v[i];
        if (vtv == 0.0) continue;
        for (int j = k; j < 3; ++j) {
            double dot = 0.0;
            for (int i = k; i < 4; ++i) dot += v[i] * A[i][j];
            const double f = 2.0 * dot / vtv;
            for (int i = k; i < 4; ++i) A[i][j] -= f * v[i];
        }
        double dotb = 0.0;
        for (int i = k; i < 4; ++i) dotb += v[i] * b[i];
        const double fb = 2.0 * dotb / vtv;
        for (int i = k; i < 4; ++i) b[i] -= fb * v[i];
    }
    std::array<double, 3> x{};
    for (int k = 2; k >= 0; --k) {
        double acc = b[k];
        for (int j = k + 1; j < 3; ++j) acc -= A[k][j] * x[j];
        x[k] = A[k][k] != 0.0 ? acc / A[k][k] : 0.0;
    }
    for (int j = 0; j < 3; ++j) x[j] *= cs[j];
    return x;
}

// Residual 4-vector: the three equilibrium conditions plus the
// vanishing-left-endpoint relation 1 + c1 + c2 they imply at the root.
// The extra row makes the Gauss-Newton system full-rank at the solution.
std::array<double, 4> gauge_residuals(double c1, double c2, double L, double nu) {
    const auto r = equilibrium_residuals(c1, c2, L, nu);
    return {r[0], r[1], r[2], 1.0 + c1 + c2};
}

double norm2(const std::array<double, 4>& r) {
    return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3]);
}

DiffusiveEquilibrium gauss_newton(double nu, EquilibriumGuess g) {
    const double s = std::sqrt(2.0 * nu);
    double c1 = g.c1, c2 = g.c2, L = g.L;
    require_resolvable(L, s);
    std::array<double, 4> r = gauge_residuals(c1, c2, L, nu);
    for (int iter = 0; iter < 100; ++iter) {
        const double rinf = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2]), std::abs(r[3])});
        if (rinf <= 1e-12) {
            DiffusiveEquilibrium eq;
            eq.nu = nu;
            eq.c1 = c1;
            eq.c2 = c2;
            eq.L = L;
            return eq;
        }
        const auto J3 = equilibrium_jacobian(c1, c2, L, nu);
        std::array<std::array<double, 3>, 4> J{J3[0], J3[1], J3[2], {1.0, 1.0, 0.0}};
        const auto delta = equilibrated_lstsq(J, {-r[0], -r[1], -r[2], -r[3]});
        const double rn = norm2(r);
        bool accepted = false;
        for (double lam = 1.0; lam >= 1.0 / (1 << 20); lam *= 0.5) {
            const double nc1 = c1 + lam * delta[0];
            const double nc2 = c2 + lam * delta[1];
            const double nL = L + lam * delta[2];
            if (!(nL > 0.0) || nL / s > 690.0) continue;
            const auto nr = gauge_residuals(nc1, nc2, nL, nu);
            if (norm2(nr) < rn) {
                c1 = nc1;
                c2 = nc2;
                L = nL;
                r = nr;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    const double rinf = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2]), std::abs(r[3])});
    if (rinf <= 1e-10) {
        DiffusiveEquilibrium eq;
        eq.nu = nu;
        eq.c1 = c1;
        eq.c2 = c2;
        eq.L = L;
        return eq;
    }
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "equilibrium solve: no convergence at nu=%.3e (residual %.3e)", nu, rinf);
    throw EquilibriumConvergenceError(msg, c1, c2, L, rinf);
}

}  // namespace

DiffusiveEquilibrium solve_equilibrium(double nu, const std::optional<EquilibriumGuess>& guess) {
    if (!(nu > 0.0)) throw std::domain_error("solve_equilibrium: requires nu > 0");
    if (guess) return gauss_newton(nu, *guess);

    // Continuation from nu = 1e-1 toward the target in logarithmic steps,
    // warm-starting each solve from the previous solution.
    const double nu_start = 1e-1;
    const auto cf = closed_form_equilibrium(std::max(nu, nu_start));
    EquilibriumGuess g{cf.c1, cf.c2, cf.L};
    if (nu >= nu_start) return gauss_newton(nu, g);

    const double decades = std::log10(nu_start / nu);
    const int n_steps = std::max(1, static_cast<int>(std::ceil(4.0 * decades)));
    DiffusiveEquilibrium eq = gauss_newton(nu_start, g);
    for (int k = 1; k <= n_steps; ++k) {
        const double nu_k = nu_start * std::pow(nu / nu_start, static_cast<double>(k) / n_steps);
        eq = gauss_newton(nu_k, EquilibriumGuess{eq.c1, eq.c2, eq.L});
    }
    return eq;
}

DensityField equilibrium_density(const DiffusiveEquilibrium& eq, const Grid1D& grid) {
    const double s = eq.s();
    // Antiderivative of the ansatz: P(x) = c1 s e^{x/s} - c2 s e^{-x/s} + x.
    auto primitive = [&](double x) {
        return eq.c1 * s * std::exp(x / s) - eq.c2 * s * std::exp(-x / s) + x;
    };
    DensityField rho{grid, std::vector<double>(grid.n_cells, 0.0)};
    const double h = grid.h();
    for (int i = 0; i < grid.n_cells; ++i) {
        const double a = std::min(grid.edge(i), eq.L);
        const double b = std::min(grid.edge(i + 1), eq.L);
        if (b > a) rho.values[i] = (primitive(b) - primitive(a)) / h;
    }
    return rho;
}

std::vector<double> lambda_values_analytic(const DiffusiveEquilibrium& eq,
                                           const std::vector<double>& xs) {
    const double s = eq.s();
    const double c1 = eq.c1, c2 = eq.c2, L = eq.L;
    const AnsatzTerms t = ansatz_terms(c1, c2, L, eq.nu);
    // Second moment over [0, L] in closed form.
    const double M2 = c1 * (t.E * (s * L * L - 2.0 * s * s * L + 2.0 * s * s * s) - 2.0 * s * s * s) +
                      c2 * (-t.Em * (s * L * L + 2.0 * s * s * L + 2.0 * s * s * s) + 2.0 * s * s * s) +
                      L * L * L / 3.0;
    auto cdf_at = [&](double x) {
        return c1 * s * (std::exp(x / s) - 1.0) - c2 * s * (std::exp(-x / s) - 1.0) + x;
    };
    auto partial_first_moment = [&](double x) {
        const double ex = std::exp(x / s), em = std::exp(-x / s);
        return c1 * (s * x * ex - s * s * ex + s * s) + c2 * (-s * x * em - s * s * em + s * s) +
               0.5 * x * x;
    };

    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        // (K * mubar)(x) for K(z) = -|z|/2 + z^2/2 splits into partial
        // moments of the ansatz on either side of x:
        //   -1/2 [2 x F(x) - 2 G(x) + M1 - x] + 1/2 [x^2 - 2 x M1 + M2],
        // where F is the cdf and G the partial first moment, both clamped
        // at L beyond the support.
        const double xc = std::min(std::max(x, 0.0), L);
        const double F = x <= 0.0 ? 0.0 : (x >= L ? t.M0 : cdf_at(xc));
        const double G = x <= 0.0 ? 0.0 : (x >= L ? t.M1 : partial_first_moment(xc));
        const double interaction =
            -0.5 * (2.0 * x * F - 2.0 * G + t.M1 - x * t.M0) + 0.5 * (x * x * t.M0 - 2.0 * x * t.M1 + M2);
        const double density =
            (x >= 0.0 && x <= L) ? c1 * std::exp(x / s) + c2 * std::exp(-x / s) + 1.0 : 0.0;
        out.push_back(s * s * density + interaction);
    }
    return out;
}

double lambda_multiplier_analytic(const DiffusiveEquilibrium& eq) {
    return lambda_values_analytic(eq, {0.5 * eq.L}).front();
}

}  // namespace agglab
