#pragma once

// Positivity-preserving, mass-conservative finite-volume solver for the
// aggregation model with degenerate (porous-medium type) diffusion.
//
// On a uniform grid the cell potential
//     xi_i = nu^alpha * m/(m-1) * rho_i^(m-1) + (K * rho)_i + V(x_i)
// drives edge velocities u_{i+1/2} = -(xi_{i+1} - xi_i)/h; mass moves by
// first-order upwind fluxes under an adaptive CFL time step, with zero flux
// through the domain boundary.

#include <vector>

#include "agglab/energy.hpp"
#include "agglab/measures.hpp"
#include "agglab/potentials.hpp"

namespace agglab {

struct FVConfig {
    Grid1D grid = Grid1D::defaults();
    double nu = 1e-3;
    double alpha = 1.0;
    double m_exp = 2.0;
    double cfl = 0.4;
    double t_end = 1.0;
    PotentialSpec potential = PotentialSpec::c0();
    std::vector<double> output_times;  // snapshot schedule; t = 0 is always recorded
};

struct FVTrajectory {
    std::vector<double> times;
    std::vector<DensityField> snapshots;
    std::vector<EnergyBreakdown> energies;
    std::vector<double> dts;              // time step in force when each snapshot was taken
    std::vector<double> boundary_masses;  // mass of the component attached to the left boundary
    std::vector<double> event_times;      // mass-transfer events at the default gap tolerance
    double gap_tol = 0.0;                 // tolerance used for boundary_masses / event_times
    double max_mass_drift = 0.0;          // max |mass - initial mass| seen at any step
    double min_cell_value = 0.0;          // most negative cell value seen at any step
};

// Velocities at the n-1 interior edges (boundary edges carry no flux).
// All edges are reported, including those in the zero-density region where
// the driving potential reduces to the interaction convolution plus the
// external term.
std::vector<double> edge_velocities(const DensityField& rho, const FVConfig& cfg);

// One upwind Euler step.  dt = cfl * h / max|u| over all interior edges
// (a fixed fallback of 1e-2 when the field vanishes), additionally capped
// by dt_cap so the caller can land exactly on output times.  Returns the
// updated density and the dt actually used.
std::pair<DensityField, double> fv_step(const DensityField& rho, const FVConfig& cfg,
                                        double dt_cap = 1e300);

// Advance to the last scheduled time (cfg.output_times if nonempty, else
// cfg.t_end), recording snapshots, per-snapshot energies and boundary-mass
// diagnostics, and scanning for mass-transfer events.  Throws on loss of
// positivity (which the CFL bound rules out) or mass drift beyond 1e-9.
FVTrajectory run_fv(const DensityField& initial, const FVConfig& cfg);

// Mass of the maximal run of cells with rho > gap_tol attached to the left
// boundary (zero when the first cell is already below the tolerance).
double boundary_component_mass(const DensityField& rho, double gap_tol);

// Detachment events: times t_{k+1} such that the boundary-component mass
// drops by more than 1% of total mass between consecutive snapshots while a
// gap of cells <= gap_tol separates the boundary component from the rest of
// the mass at both snapshots (requiring the gap on both sides excludes the
// bookkeeping jump at the instant a gap first forms).
std::vector<double> detect_mass_transfer(const FVTrajectory& traj, double gap_tol);

// Default gap tolerance: 1e-6 times the peak of the initial density.
double default_gap_tol(const DensityField& initial);

// Summary rows `t,dt,mass,energy_total,energy_entropy,boundary_mass`.
void write_fv_summary_csv(const FVTrajectory& traj, std::ostream& out);

}  // namespace agglab
