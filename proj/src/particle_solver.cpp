#include "agglab/particle_solver.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "agglab/energy.hpp"

namespace agglab {

std::vector<double> velocities(const ParticleEnsemble& e, const PotentialSpec& spec) {
    const std::size_t n = e.positions.size();
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += e.weights[j] * eval_dK(spec, e.positions[i] - e.positions[j]);
        v[i] = -acc;
    }
    return v;
}

double project(double x, double v, const Grid1D& domain) {
    if (x < domain.left || x > domain.right)
        throw std::invalid_argument("project: position outside the domain closure");
    if (x == domain.left && v < 0.0) return 0.0;
    if (x == domain.right && v > 0.0) return 0.0;
    return v;
}

namespace {

std::vector<double> projected_velocities(const ParticleEnsemble& e, const ParticleSolverConfig& cfg) {
    std::vector<double> v = velocities(e, cfg.potential);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = project(e.positions[i], v[i], cfg.domain);
    return v;
}

void advance_in_place(ParticleEnsemble& e, const std::vector<double>& v,
                      const ParticleSolverConfig& cfg) {
    for (std::size_t i = 0; i < e.positions.size(); ++i) {
        double x = e.positions[i] + cfg.dt * v[i];
        e.positions[i] = std::clamp(x, cfg.domain.left, cfg.domain.right);
    }
    // Keep (position, weight) pairs together while restoring sorted order.
    std::vector<std::size_t> order(e.positions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return e.positions[a] < e.positions[b]; });
    ParticleEnsemble sorted;
    sorted.positions.reserve(order.size());
    sorted.weights.reserve(order.size());
    for (std::size_t k : order) {
        sorted.positions.push_back(e.positions[k]);
        sorted.weights.push_back(e.weights[k]);
    }
    e = std::move(sorted);
}

double snapshot_energy(const ParticleEnsemble& e, const PotentialSpec& spec) {
    return interaction_energy(MixedMeasure::from_particles(e), spec);
}

}  // namespace

ParticleEnsemble step(const ParticleEnsemble& e, const ParticleSolverConfig& cfg) {
    ParticleEnsemble next = e;
    advance_in_place(next, projected_velocities(e, cfg), cfg);
    return next;
}

ParticleTrajectory run(const ParticleEnsemble& initial, const ParticleSolverConfig& cfg) {
    ParticleTrajectory traj;
    std::vector<double> outputs = cfg.output_times;
    std::sort(outputs.begin(), outputs.end());

    ParticleEnsemble state = initial;
    std::vector<double> v = projected_velocities(state, cfg);
    auto max_abs = [](const std::vector<double>& vals) {
        double m = 0.0;
        for (double x : vals) m = std::max(m, std::abs(x));
        return m;
    };

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(state);
        traj.energies.push_back(snapshot_energy(state, cfg.potential));
        traj.max_speeds.push_back(max_abs(v));
    };

    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] <= 0.0) ++next_out;
    record(0.0);

    const long n_steps = std::lround(cfg.t_end / cfg.dt);
    for (long k = 1; k <= n_steps; ++k) {
        if (max_abs(v) < cfg.equilibrium_tol) {
            traj.reached_equilibrium = true;
            traj.equilibrium_time = (k - 1) * cfg.dt;
            break;
        }
        advance_in_place(state, v, cfg);
        const double t = k * cfg.dt;
        v = projected_velocities(state, cfg);
        if (next_out < outputs.size() && t >= outputs[next_out] - 1e-9) {
            record(t);
            while (next_out < outputs.size() && t >= outputs[next_out] - 1e-9) ++next_out;
        }
    }
    if (traj.times.back() != cfg.t_end || traj.reached_equilibrium) {
        // Always expose the terminal state (early equilibrium or a schedule
        // that did not include t_end).
        if (traj.states.back().positions != state.positions) record(traj.reached_equilibrium
                                                                        ? traj.equilibrium_time
                                                                        : cfg.t_end);
    }
    return traj;
}

ParticleEnsemble mid_quantile_particles(int n) {
    if (n < 1) throw std::invalid_argument("mid_quantile_particles: need n >= 1");
    ParticleEnsemble e;
    e.positions.resize(n);
    e.weights.assign(n, 1.0 / n);
    for (int k = 1; k <= n; ++k) e.positions[k - 1] = (k - 0.5) * 0.25 / n;
    return e;
}

MixedMeasure cluster_particles(const ParticleEnsemble& e, double cluster_tol) {
    std::vector<std::size_t> order(e.positions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return e.positions[a] < e.positions[b]; });

    std::vector<Atom> atoms;
    double mass = 0.0, weighted = 0.0, prev = 0.0;
    for (std::size_t k : order) {
        const double x = e.positions[k];
        const double w = e.weights[k];
        if (mass > 0.0 && x - prev > cluster_tol) {
            atoms.push_back({weighted / mass, mass});
            mass = 0.0;
            weighted = 0.0;
        }
        mass += w;
        weighted += w * x;
        prev = x;
    }
    if (mass > 0.0) atoms.push_back({weighted / mass, mass});
    return MixedMeasure::from_atoms(std::move(atoms));
}

void write_particle_summary_csv(const ParticleTrajectory& traj, std::ostream& out) {
    out << "t,energy,max_speed\n";
    char buf[128];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", traj.times[i], traj.energies[i],
                      traj.max_speeds[i]);
        out << buf;
    }
}

}  // namespace agglab
