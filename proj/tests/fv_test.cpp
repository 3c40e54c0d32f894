#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "agglab/fv_solver.hpp"
#include "agglab/measures.hpp"
#include "agglab/particle_solver.hpp"
#include "agglab/transport.hpp"
#include "doctest.h"

using namespace agglab;

namespace {

// Reference edge velocities straight from the definition: full cell
// potential on every cell (O(n^2)), then one forward difference per edge.
// The production path splits the work into window/near/far regimes, and this
// oracle pins all three against the same formula.
std::vector<double> brute_velocities(const DensityField& rho, const FVConfig& cfg) {
    const Grid1D& g = rho.grid;
    const int n = g.n_cells;
    const double h = g.h();
    const double coeff = std::pow(cfg.nu, cfg.alpha) * cfg.m_exp / (cfg.m_exp - 1.0);
    std::vector<double> xi(n);
    for (int i = 0; i < n; ++i) {
        double conv = 0.0;
        for (int j = 0; j < n; ++j) conv += eval_K(cfg.potential, (i - j) * h) * rho.values[j];
        const double ent = rho.values[i] > 0.0 ? std::pow(rho.values[i], cfg.m_exp - 1.0) : 0.0;
        xi[i] = coeff * ent + h * conv + eval_V(cfg.potential, g.center(i));
    }
    std::vector<double> u(n - 1);
    for (int i = 0; i + 1 < n; ++i) u[i] = -(xi[i + 1] - xi[i]) / h;
    return u;
}

void check_against_brute(const DensityField& rho, const FVConfig& cfg) {
    const auto fast = edge_velocities(rho, cfg);
    const auto slow = brute_velocities(rho, cfg);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(std::abs(fast[i] - slow[i]) <= 1e-12);
}

DensityField block(const Grid1D& g, int first, std::vector<double> vals) {
    DensityField rho{g, std::vector<double>(g.n_cells, 0.0)};
    for (std::size_t k = 0; k < vals.size(); ++k) rho.values[first + k] = vals[k];
    return rho;
}

}  // namespace

TEST_SUITE("fv") {

TEST_CASE("constant density with a zero kernel is stationary") {
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 1.5, 150};
    cfg.nu = 0.1;
    cfg.potential = PotentialSpec::zero();
    const DensityField rho{cfg.grid, std::vector<double>(150, 2.0 / 3.0)};
    for (double u : edge_velocities(rho, cfg)) CHECK(u == 0.0);
    const auto [next, dt] = fv_step(rho, cfg);
    CHECK(dt == 1e-2);  // fallback step when the field vanishes
    CHECK(next.values == rho.values);
    const auto [capped, dt2] = fv_step(rho, cfg, 5e-3);
    CHECK(dt2 == 5e-3);
    CHECK(capped.values == rho.values);
}

TEST_CASE("empty density never moves") {
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 1.0, 10};
    cfg.nu = 1e-2;
    const DensityField rho{cfg.grid, std::vector<double>(10, 0.0)};
    const auto [next, dt] = fv_step(rho, cfg, 1e-3);
    CHECK(dt == 1e-3);
    CHECK(next.values == rho.values);
}

TEST_CASE("diffusive bump spreads symmetrically") {
    // Three cells, zero kernel, nu = 1, m = 2: the cell potential is (0,2,0),
    // both edge velocities have magnitude 2/h = 20, and the CFL step 0.4h/20
    // moves 40% of the bump into each neighbour.
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 0.3, 3};
    cfg.nu = 1.0;
    cfg.potential = PotentialSpec::zero();
    const DensityField rho = block(cfg.grid, 1, {1.0});
    const auto u = edge_velocities(rho, cfg);
    REQUIRE(u.size() == 2);
    CHECK(u[0] == doctest::Approx(-20.0).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(20.0).epsilon(1e-12));
    const auto [next, dt] = fv_step(rho, cfg);
    CHECK(dt == doctest::Approx(2e-3).epsilon(1e-12));
    CHECK(next.values[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(next.values[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(next.values[2] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("velocities match the quadratic-cost definition") {
    const Grid1D g{0.0, 1.0, 20};
    FVConfig cfg;
    cfg.grid = g;
    cfg.nu = 3e-3;

    SUBCASE("interior support, kinked kernel") {
        cfg.potential = PotentialSpec::c0();
        check_against_brute(block(g, 8, {3.0, 1.5, 2.0}), cfg);
    }
    SUBCASE("interior support, smoothed kernel") {
        cfg.potential = PotentialSpec::c2();
        check_against_brute(block(g, 8, {3.0, 1.5, 2.0}), cfg);
    }
    SUBCASE("support against the left wall") {
        cfg.potential = PotentialSpec::c2();
        check_against_brute(block(g, 0, {2.0, 1.0, 0.5}), cfg);
    }
    SUBCASE("support against the right wall") {
        cfg.potential = PotentialSpec::c0();
        check_against_brute(block(g, 17, {0.5, 1.0, 2.0}), cfg);
    }
    SUBCASE("cubic exponent") {
        cfg.potential = PotentialSpec::c2();
        cfg.m_exp = 3.0;
        check_against_brute(block(g, 9, {1.0, 2.5}), cfg);
    }
    SUBCASE("random supports") {
        std::mt19937 rng(6021);
        std::uniform_real_distribution<double> val(0.5, 3.0);
        const Grid1D wide{0.0, 2.0, 40};
        cfg.grid = wide;
        for (int trial = 0; trial < 5; ++trial) {
            const int first = static_cast<int>(rng() % 30);
            const int len = 1 + static_cast<int>(rng() % 8);
            std::vector<double> vals(static_cast<std::size_t>(len));
            for (double& v : vals) v = val(rng);
            cfg.potential = (trial % 2 == 0) ? PotentialSpec::c0() : PotentialSpec::c2();
            check_against_brute(block(wide, std::min(first, 40 - len), vals), cfg);
        }
    }
}

TEST_CASE("time step obeys the fastest edge anywhere in the domain") {
    // With a small blob near the left wall the fastest edge sits in the
    // zero-density region at the far right (confinement pulling inward), not
    // inside the mass-carrying window.
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 1.5, 300};
    cfg.nu = 1e-7;
    cfg.potential = PotentialSpec::c0();
    const DensityField rho = initial_density(cfg.grid);
    const auto u = edge_velocities(rho, cfg);
    REQUIRE(u.size() == 299);
    int imax = 0;
    double umax = 0.0;
    for (int i = 0; i < 299; ++i)
        if (std::abs(u[i]) > umax) {
            umax = std::abs(u[i]);
            imax = i;
        }
    CHECK(umax == doctest::Approx(0.87).epsilon(1e-12));
    CHECK(imax == 298);  // far from the support, which ends at cell 49
    double near_support = 0.0;
    for (int i = 0; i <= 50; ++i) near_support = std::max(near_support, std::abs(u[i]));
    CHECK(near_support < 0.5 * umax);
    const auto [next, dt] = fv_step(rho, cfg);
    CHECK(dt == doctest::Approx(0.4 * cfg.grid.h() / umax).epsilon(1e-14));
}

TEST_CASE("conservation, positivity and dissipation along a run") {
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 1.5, 300};
    cfg.nu = 1e-3;
    cfg.t_end = 0.3;
    cfg.potential = PotentialSpec::c2();
    cfg.output_times = {0.15, 0.3};
    const FVTrajectory traj = run_fv(initial_density(cfg.grid), cfg);

    REQUIRE(traj.times.size() == 3);
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.times[1] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(traj.times[2] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(traj.max_mass_drift <= 1e-12);
    CHECK(traj.min_cell_value == 0.0);
    CHECK(traj.gap_tol == doctest::Approx(4e-6).epsilon(1e-12));

    // Frozen energy/step diagnostics for this configuration.
    CHECK(traj.energies[0].total == doctest::Approx(-0.016060).epsilon(1e-9));
    CHECK(traj.energies[1].total == doctest::Approx(-0.0208464248325).epsilon(1e-9));
    CHECK(traj.energies[2].total == doctest::Approx(-0.0235828030521).epsilon(1e-9));
    CHECK(traj.dts[0] == 0.0);
    CHECK(traj.dts[1] == doctest::Approx(4.04788808213e-4).epsilon(1e-9));
    CHECK(traj.dts[2] == doctest::Approx(5.88942397836e-4).epsilon(1e-9));
    for (std::size_t k = 1; k < traj.energies.size(); ++k)
        CHECK(traj.energies[k].total <= traj.energies[k - 1].total + 1e-12);

    // The whole blob stays attached to the left wall (bridge morphology).
    CHECK(traj.boundary_masses[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (double bm : traj.boundary_masses) CHECK(bm > 0.999);
    CHECK(traj.event_times.empty());

    // Snapshot energies agree with a direct evaluation.
    const EnergyBreakdown direct =
        diffusive_energy(traj.snapshots[1], cfg.nu, cfg.alpha, cfg.m_exp, cfg.potential);
    CHECK(traj.energies[1].total == direct.total);
}

TEST_CASE("grid refinement converges on a fixed horizon") {
    auto at_t = [](int cells) {
        FVConfig cfg;
        cfg.grid = Grid1D{0.0, 1.5, cells};
        cfg.nu = 1e-3;
        cfg.t_end = 0.5;
        cfg.potential = PotentialSpec::c2();
        cfg.output_times = {0.5};
        return run_fv(initial_density(cfg.grid), cfg).snapshots.back();
    };
    const DensityField fine = at_t(600);
    const double e150 =
        w2_mixed(MixedMeasure::from_density(at_t(150)), MixedMeasure::from_density(fine));
    const double e300 =
        w2_mixed(MixedMeasure::from_density(at_t(300)), MixedMeasure::from_density(fine));
    CHECK(e150 == doctest::Approx(2.67780462421e-3).epsilon(1e-6));
    CHECK(e300 == doctest::Approx(1.41584752803e-3).epsilon(1e-6));
    CHECK(e300 < 0.75 * e150);  // roughly first-order decay
}

TEST_CASE("zero-diffusion runs track the projected particle flow") {
    // nu = 0 removes the entropy term entirely; the grid solver and the
    // particle solver then discretize the same dynamics and should stay a
    // few grid cells apart in transport distance at t = 0.5.
    auto gap_at_half = [](const PotentialSpec& spec) {
        FVConfig fcfg;
        fcfg.nu = 0.0;
        fcfg.t_end = 0.5;
        fcfg.potential = spec;
        fcfg.output_times = {0.5};
        const FVTrajectory traj = run_fv(initial_density(fcfg.grid), fcfg);
        ParticleSolverConfig pcfg;
        pcfg.t_end = 0.5;
        pcfg.potential = spec;
        pcfg.output_times = {0.5};
        const ParticleTrajectory ptraj = run(mid_quantile_particles(64), pcfg);
        return w2_mixed(MixedMeasure::from_density(traj.snapshots.back()),
                        cluster_particles(ptraj.states.back()));
    };
    CHECK(gap_at_half(PotentialSpec::c2()) == doctest::Approx(2.53476058033e-3).epsilon(1e-6));
    CHECK(gap_at_half(PotentialSpec::c0()) == doctest::Approx(2.39946102006e-3).epsilon(1e-6));
}

TEST_CASE("boundary component mass") {
    const Grid1D g{0.0, 1.5, 15};
    CHECK(boundary_component_mass(DensityField{g, {3, 2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
                                  1e-6) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(boundary_component_mass(DensityField{g, {0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
                                  1e-6) == 0.0);
    // A first cell exactly at the tolerance does not count as attached.
    CHECK(boundary_component_mass(DensityField{g, {0.5, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
                                  0.5) == 0.0);
}

TEST_CASE("default gap tolerance scales with the initial peak") {
    CHECK(default_gap_tol(initial_density(Grid1D::defaults())) ==
          doctest::Approx(4e-6).epsilon(1e-12));
    CHECK(default_gap_tol(DensityField{Grid1D{0.0, 1.0, 4}, {0, 0, 0, 0}}) == 0.0);
}

TEST_CASE("mass transfer detection") {
    const Grid1D g{0.0, 1.5, 15};
    auto snap = [&](std::vector<double> v) { return DensityField{g, std::move(v)}; };
    const double tol = 0.5;

    // Boundary component loses 0.1 of mass 0.5 while a gap exists on both
    // sides of the transition: one event at the later snapshot.
    FVTrajectory traj;
    traj.times = {0.0, 1.0};
    traj.snapshots = {snap({2, 2, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}),
                      snap({1, 2, 0, 0, 1.8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0})};
    const auto events = detect_mass_transfer(traj, tol);
    REQUIRE(events.size() == 1);
    CHECK(events[0] == 1.0);

    SUBCASE("no gap at the later snapshot suppresses the event") {
        traj.snapshots[1] = snap({1, 2, 0.6, 0.6, 1.8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
        CHECK(detect_mass_transfer(traj, tol).empty());
    }
    SUBCASE("a sub-threshold drop is ignored") {
        traj.snapshots[1] = snap({1.96, 2, 0, 0, 1.04, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
        CHECK(detect_mass_transfer(traj, tol).empty());
    }
    SUBCASE("the instant a gap first forms is excluded") {
        traj.times = {0.0, 1.0, 2.0};
        traj.snapshots = {snap({2, 2, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}),   // attached
                          snap({1, 2, 0, 0, 1.8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}),  // gap forms
                          snap({0.4, 2, 0, 0, 2.4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0})};
        const auto ev = detect_mass_transfer(traj, tol);
        REQUIRE(ev.size() == 1);
        CHECK(ev[0] == 2.0);
    }
}

TEST_CASE("configuration validation") {
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 1.5, 30};
    const DensityField rho = initial_density(cfg.grid);
    cfg.m_exp = 1.0;
    CHECK_THROWS_AS(run_fv(rho, cfg), std::domain_error);
    cfg.m_exp = 2.0;
    cfg.cfl = 0.0;
    CHECK_THROWS_AS(run_fv(rho, cfg), std::domain_error);
    cfg.cfl = 1.5;
    CHECK_THROWS_AS(run_fv(rho, cfg), std::domain_error);
}

TEST_CASE("default schedule runs to the end time") {
    FVConfig cfg;
    cfg.grid = Grid1D{0.0, 1.5, 150};
    cfg.nu = 1e-2;
    cfg.t_end = 0.05;
    cfg.potential = PotentialSpec::c2();
    const FVTrajectory traj = run_fv(initial_density(cfg.grid), cfg);
    REQUIRE(traj.times.size() == 2);
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.times[1] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(traj.snapshots.back().mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("summary csv layout") {
    FVTrajectory traj;
    traj.times = {0.0};
    traj.dts = {0.0};
    traj.boundary_masses = {1.0};
    EnergyBreakdown e;
    e.total = -0.5;
    e.entropy = 0.25;
    traj.energies = {e};
    traj.snapshots = {DensityField{Grid1D{0.0, 1.0, 10}, std::vector<double>(10, 1.0)}};
    std::ostringstream out;
    write_fv_summary_csv(traj, out);
    CHECK(out.str() == "t,dt,mass,energy_total,energy_entropy,boundary_mass\n0,0,1,-0.5,0.25,1\n");
}

}  // TEST_SUITE
