#pragma once

// Projected particle dynamics for the aggregation model without diffusion.
//
// N weighted particles follow the nonlocal velocity field
//     v_i = -sum_j w_j K'(x_i - x_j),
// integrated by forward Euler with a slip boundary rule: a particle sitting
// exactly on a domain endpoint has any outward velocity component zeroed,
// so mass can accumulate on the boundary and later leave it if the field
// turns inward.

#include <cmath>
#include <vector>

#include "agglab/measures.hpp"
#include "agglab/potentials.hpp"

namespace agglab {

struct ParticleSolverConfig {
    int n_particles = 64;
    double dt = 1e-3;
    double t_end = 1.0;
    double equilibrium_tol = 1e-8;  // stop early when max |projected velocity| drops below
    PotentialSpec potential = PotentialSpec::c0();
    Grid1D domain = Grid1D::defaults();  // only the bounds are used
    std::vector<double> output_times;    // snapshot schedule; t = 0 is always recorded
};

struct ParticleTrajectory {
    std::vector<double> times;
    std::vector<ParticleEnsemble> states;
    std::vector<double> energies;    // interaction energy at each snapshot
    std::vector<double> max_speeds;  // max |projected velocity| at each snapshot
    bool reached_equilibrium = false;
    double equilibrium_time = std::nan("");
};

// Pre-projection interaction velocities; the self term vanishes because the
// kernel derivative is odd with K'(0) = 0.
std::vector<double> velocities(const ParticleEnsemble& e, const PotentialSpec& spec);

// Slip boundary rule in one dimension: zero an outward velocity at either
// endpoint, pass everything else through.  Throws std::invalid_argument for
// positions outside the closed domain.
double project(double x, double v, const Grid1D& domain);

// One forward-Euler step: move by the projected velocity, clamp to the
// domain, re-sort positions (weights travel with their particles).
ParticleEnsemble step(const ParticleEnsemble& e, const ParticleSolverConfig& cfg);

// Integrate to cfg.t_end, recording snapshots at cfg.output_times (the
// initial state is always snapshot 0) and stopping early at equilibrium.
ParticleTrajectory run(const ParticleEnsemble& initial, const ParticleSolverConfig& cfg);

// Deterministic discretization of the reference initial density
// 4 * 1_{[0, 1/4]}: n equal-weight particles at its mid-level quantiles
// (k - 1/2)/(4n), k = 1..n.
ParticleEnsemble mid_quantile_particles(int n);

// Export to a mixed measure, merging runs of particles whose consecutive
// gaps are below cluster_tol into single atoms at their centers of mass, so
// collapsed clusters are seen as genuine point masses by the transport
// metric.
MixedMeasure cluster_particles(const ParticleEnsemble& e, double cluster_tol = 1e-6);

// Summary rows `t,energy,max_speed`, one per snapshot.
void write_particle_summary_csv(const ParticleTrajectory& traj, std::ostream& out);

}  // namespace agglab
