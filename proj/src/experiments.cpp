#include "agglab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <stdexcept>

#include "agglab/equilibria.hpp"
#include "agglab/fv_solver.hpp"
#include "agglab/particle_solver.hpp"
#include "agglab/transport.hpp"

namespace agglab {

std::vector<double> default_nus(const std::string& experiment) {
    if (experiment == "minimizers") return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    if (experiment == "longrun") return {1e-5, 1e-7};
    return {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
}

std::vector<double> default_times(PotentialKind kind) {
    if (kind == PotentialKind::C2Regularized) return {0.5, 1.0, 5.0};
    return {0.1, 0.5, 3.0};
}

namespace {

std::vector<double> effective_nus(const ExperimentConfig& cfg) {
    std::vector<double> nus = cfg.nus.empty() ? default_nus(cfg.experiment) : cfg.nus;
    if (nus.empty()) throw std::invalid_argument("experiment: empty nu sweep");
    for (std::size_t i = 1; i < nus.size(); ++i)
        if (!(nus[i] < nus[i - 1]))
            throw std::invalid_argument("experiment: nu sweep must be strictly decreasing");
    return nus;
}

Grid1D make_grid(const ExperimentConfig& cfg) { return Grid1D{0.0, 1.5, cfg.cells}; }

// Snapshot index whose recorded time is closest to t.
std::size_t snapshot_index(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    double gap = std::abs(times[0] - t);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double g = std::abs(times[i] - t);
        if (g < gap) {
            gap = g;
            best = i;
        }
    }
    return best;
}

ParticleTrajectory run_reference_particles(const ExperimentConfig& cfg, double t_end,
                                           const std::vector<double>& output_times) {
    ParticleSolverConfig pcfg;
    pcfg.n_particles = cfg.n_particles;
    pcfg.dt = cfg.particle_dt;
    pcfg.t_end = t_end;
    pcfg.potential = cfg.potential;
    pcfg.domain = make_grid(cfg);
    pcfg.output_times = output_times;
    return run(mid_quantile_particles(cfg.n_particles), pcfg);
}

FVTrajectory run_diffusive(const ExperimentConfig& cfg, double nu,
                           const std::vector<double>& output_times) {
    FVConfig fcfg;
    fcfg.grid = make_grid(cfg);
    fcfg.nu = nu;
    fcfg.alpha = cfg.alpha;
    fcfg.m_exp = cfg.m_exp;
    fcfg.t_end = output_times.back();
    fcfg.potential = cfg.potential;
    fcfg.output_times = output_times;
    return run_fv(initial_density(fcfg.grid), fcfg);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

double worst_rise_rate(const std::vector<double>& times, const std::vector<double>& energies) {
    double worst = 0.0;
    for (std::size_t k = 1; k < energies.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        if (dt > 0.0) worst = std::max(worst, (energies[k] - energies[k - 1]) / dt);
    }
    return worst;
}

}  // namespace

void RunDiagnostics::absorb(const FVTrajectory& traj) {
    max_mass_drift = std::max(max_mass_drift, traj.max_mass_drift);
    min_cell_value = std::min(min_cell_value, traj.min_cell_value);
    std::vector<double> totals;
    totals.reserve(traj.energies.size());
    for (const EnergyBreakdown& e : traj.energies) totals.push_back(e.total);
    fv_energy_rise_rate = std::max(fv_energy_rise_rate, worst_rise_rate(traj.times, totals));
}

void RunDiagnostics::absorb(const ParticleTrajectory& traj) {
    particle_energy_rise_rate =
        std::max(particle_energy_rise_rate, worst_rise_rate(traj.times, traj.energies));
}

void RunDiagnostics::merge(const RunDiagnostics& other) {
    max_mass_drift = std::max(max_mass_drift, other.max_mass_drift);
    min_cell_value = std::min(min_cell_value, other.min_cell_value);
    fv_energy_rise_rate = std::max(fv_energy_rise_rate, other.fv_energy_rise_rate);
    particle_energy_rise_rate =
        std::max(particle_energy_rise_rate, other.particle_energy_rise_rate);
}

EarlyTable run_early(const ExperimentConfig& cfg) {
    const std::vector<double> nus = effective_nus(cfg);
    std::vector<double> times = cfg.times.empty() ? default_times(cfg.potential.kind) : cfg.times;
    std::sort(times.begin(), times.end());

    std::vector<double> positive_times;
    for (double t : times)
        if (t > 0.0) positive_times.push_back(t);
    if (positive_times.empty()) throw std::invalid_argument("run_early: needs a positive time");

    const ParticleTrajectory particles = run_reference_particles(cfg, positive_times.back(),
                                                                 positive_times);
    std::vector<MixedMeasure> plain_at;
    plain_at.reserve(positive_times.size());
    for (double t : positive_times)
        plain_at.push_back(cluster_particles(particles.states[snapshot_index(particles.times, t)]));

    struct Column {
        std::vector<double> w2s;
        RunDiagnostics diag;
    };
    auto column = [&](double nu) {
        const FVTrajectory traj = run_diffusive(cfg, nu, positive_times);
        Column col;
        col.diag.absorb(traj);
        for (std::size_t k = 0; k < positive_times.size(); ++k) {
            const std::size_t i = snapshot_index(traj.times, positive_times[k]);
            col.w2s.push_back(w2_mixed(MixedMeasure::from_density(traj.snapshots[i]), plain_at[k]));
        }
        return col;
    };

    std::vector<std::future<Column>> jobs;
    for (double nu : nus)
        jobs.push_back(std::async(std::launch::async, column, nu));

    EarlyTable table;
    table.potential = cfg.potential.kind;
    table.times = times;
    table.diagnostics.absorb(particles);
    for (std::size_t i = 0; i < nus.size(); ++i) {
        const Column col = jobs[i].get();
        table.diagnostics.merge(col.diag);
        std::size_t pos = 0;
        for (double t : times) {
            if (t > 0.0)
                table.rows.push_back({nus[i], t, col.w2s[pos++]});
            else
                table.rows.push_back({nus[i], t, 0.0});
        }
    }
    return table;
}

LongrunResult run_longrun(const ExperimentConfig& cfg) {
    const std::vector<double> nus = cfg.nus.empty() ? default_nus("longrun") : effective_nus(cfg);

    std::vector<double> cadence_times;
    for (double t = cfg.longrun_cadence; t <= cfg.longrun_t_end + 1e-9; t += cfg.longrun_cadence)
        cadence_times.push_back(t);

    // One particle run serves both purposes: snapshots on the cadence grid
    // for the running distance, and the terminal state as the steady-state
    // candidate.
    std::vector<double> particle_outputs = cadence_times;
    particle_outputs.push_back(cfg.equilibrium_horizon);
    const ParticleTrajectory particles =
        run_reference_particles(cfg, cfg.equilibrium_horizon, particle_outputs);

    LongrunResult result;
    result.potential = cfg.potential.kind;
    result.particle_equilibrium_reached = particles.reached_equilibrium;
    result.particle_equilibrium_time =
        particles.reached_equilibrium ? particles.equilibrium_time : cfg.equilibrium_horizon;
    const MixedMeasure mubar = cluster_particles(particles.states.back());

    std::vector<MixedMeasure> plain_at;
    plain_at.reserve(cadence_times.size());
    for (double t : cadence_times)
        plain_at.push_back(cluster_particles(particles.states[snapshot_index(particles.times, t)]));

    struct SeriesResult {
        LongrunSeries series;
        RunDiagnostics diag;
    };
    auto one_series = [&](double nu) {
        const FVTrajectory traj = run_diffusive(cfg, nu, cadence_times);
        SeriesResult out;
        out.diag.absorb(traj);
        LongrunSeries& s = out.series;
        s.nu = nu;
        s.event_times = traj.event_times;
        double best = 0.0;
        for (std::size_t k = 0; k < cadence_times.size(); ++k) {
            const std::size_t i = snapshot_index(traj.times, cadence_times[k]);
            const MixedMeasure state = MixedMeasure::from_density(traj.snapshots[i]);
            s.times.push_back(cadence_times[k]);
            s.w2_to_particle.push_back(w2_mixed(state, plain_at[k]));
            s.w2_to_mubar.push_back(w2_mixed(state, mubar));
            s.energy_total.push_back(traj.energies[i].total);
            if (k == 0 || s.w2_to_mubar.back() < best) {
                best = s.w2_to_mubar.back();
                s.argmin_time = cadence_times[k];
            }
        }
        return out;
    };

    result.diagnostics.absorb(particles);
    std::vector<std::future<SeriesResult>> jobs;
    for (double nu : nus)
        jobs.push_back(std::async(std::launch::async, one_series, nu));
    for (auto& j : jobs) {
        SeriesResult sr = j.get();
        result.diagnostics.merge(sr.diag);
        result.series.push_back(std::move(sr.series));
    }
    return result;
}

MinimizerTable run_minimizers(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.experiment = "minimizers";
    const std::vector<double> nus = c.nus.empty() ? default_nus("minimizers") : effective_nus(c);

    const Grid1D wide{0.0, 2.0, 2000};  // the support can exceed the solver domain
    const MixedMeasure target = MixedMeasure::from_density(indicator_density(0.0, 1.0, 1.0, wide));

    MinimizerTable table;
    for (double nu : nus) {
        MinimizerRow row;
        row.nu = nu;
        if (nu < 1e-5 * (1.0 - 1e-9)) {
            row.rejected = true;  // conditioning cutoff of the sweep
            table.rows.push_back(row);
            continue;
        }
        const DiffusiveEquilibrium eq = solve_equilibrium(nu);
        row.c1 = eq.c1;
        row.c2 = eq.c2;
        row.L = eq.L;
        row.mass_residual = std::abs(equilibrium_residuals(eq.c1, eq.c2, eq.L, nu)[1]);
        row.w2_to_plain_minimizer =
            w2_mixed(MixedMeasure::from_density(equilibrium_density(eq, wide)), target);
        const double s = eq.s();
        row.boundary_layer_L = eq.c1 * std::exp(eq.L / s);
        row.boundary_layer_L_m01 = eq.c1 * std::exp((eq.L - 0.01) / s);
        table.rows.push_back(row);
    }
    return table;
}

double theoretical_beta(double alpha, double m_exp) {
    return std::min(alpha - m_exp / 3.0, 1.0 / 3.0);
}

RateEstimate estimate_rate(const EarlyTable& table, double t, double alpha, double m_exp) {
    std::vector<double> lx, ly;
    double prev_w2 = 0.0;
    bool warning = false;
    bool first = true;
    for (const EarlyRow& row : table.rows) {
        if (std::abs(row.t - t) > 1e-12) continue;
        if (!(row.w2 > 0.0))
            throw std::invalid_argument("estimate_rate: needs positive distances at the fixed time");
        if (!first && row.w2 > prev_w2) warning = true;  // sweep runs toward smaller nu
        prev_w2 = row.w2;
        first = false;
        lx.push_back(std::log(row.nu));
        ly.push_back(std::log(row.w2));
    }
    if (lx.size() < 3) throw std::invalid_argument("estimate_rate: needs at least 3 rows at t");

    const auto n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }

    RateEstimate est;
    est.t = t;
    est.slope = sxy / sxx;
    est.theoretical = 0.5 * theoretical_beta(alpha, m_exp);
    est.warning_nonmonotone = warning;
    est.n_points = static_cast<int>(lx.size());
    return est;
}

void write_early_csv(const EarlyTable& table, std::ostream& out) {
    out << "nu,t,w2\n";
    for (const EarlyRow& r : table.rows)
        out << fmt(r.nu) << ',' << fmt(r.t) << ',' << fmt(r.w2) << '\n';
}

void write_longrun_csv(const LongrunResult& result, std::ostream& out) {
    out << "nu,t,w2_to_particle,w2_to_mubar,energy_total\n";
    out << "!particle_equilibrium," << (result.particle_equilibrium_reached ? 1 : 0) << ','
        << fmt(result.particle_equilibrium_time) << '\n';
    for (const LongrunSeries& s : result.series) {
        for (std::size_t k = 0; k < s.times.size(); ++k)
            out << fmt(s.nu) << ',' << fmt(s.times[k]) << ',' << fmt(s.w2_to_particle[k]) << ','
                << fmt(s.w2_to_mubar[k]) << ',' << fmt(s.energy_total[k]) << '\n';
        for (double e : s.event_times) out << "!event," << fmt(s.nu) << ',' << fmt(e) << '\n';
        out << "!argmin," << fmt(s.nu) << ',' << fmt(s.argmin_time) << '\n';
    }
}

void write_minimizers_csv(const MinimizerTable& table, std::ostream& out) {
    out << "nu,c1,c2,L,mass_residual,w2_to_plain_minimizer,boundary_layer_L,boundary_layer_L_m01\n";
    for (const MinimizerRow& r : table.rows) {
        if (r.rejected) {
            out << "!rejected," << fmt(r.nu) << ",conditioning\n";
            continue;
        }
        out << fmt(r.nu) << ',' << fmt(r.c1) << ',' << fmt(r.c2) << ',' << fmt(r.L) << ','
            << fmt(r.mass_residual) << ',' << fmt(r.w2_to_plain_minimizer) << ','
            << fmt(r.boundary_layer_L) << ',' << fmt(r.boundary_layer_L_m01) << '\n';
    }
}

void write_rates_csv(const std::vector<RateEstimate>& rates, std::ostream& out) {
    out << "t,slope,theoretical,warning_nonmonotone,n_points\n";
    for (const RateEstimate& r : rates)
        out << fmt(r.t) << ',' << fmt(r.slope) << ',' << fmt(r.theoretical) << ','
            << (r.warning_nonmonotone ? 1 : 0) << ',' << r.n_points << '\n';
}

}  // namespace agglab
