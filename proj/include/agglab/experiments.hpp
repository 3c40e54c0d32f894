#pragma once

// Batch experiment drivers: distance tables between the diffusive and plain
// solvers at early times, long-run distance/energy series with detachment
// events, the diffusive-minimizer sweep, and empirical convergence-rate
// fits.  Every driver is deterministic: sweeps fan out over nu on worker
// threads, but results are assembled in a fixed order so identical
// configurations produce byte-identical CSV files.

#include <iosfwd>
#include <string>
#include <vector>

#include "agglab/fv_solver.hpp"
#include "agglab/measures.hpp"
#include "agglab/particle_solver.hpp"
#include "agglab/potentials.hpp"

namespace agglab {

struct ExperimentConfig {
    std::string experiment = "early";  // early | longrun | minimizers | rate
    PotentialSpec potential = PotentialSpec::c2();
    std::vector<double> nus;     // empty -> experiment-specific default sweep
    double m_exp = 2.0;
    double alpha = 1.0;
    int cells = 1500;
    std::vector<double> times;   // early-table times; empty -> potential default
    std::string out_dir = ".";
    int n_particles = 64;
    double particle_dt = 1e-3;
    double longrun_t_end = 14.0;
    double longrun_cadence = 0.1;
    double equilibrium_horizon = 150.0;  // particle-run budget for finding the steady state
};

// Default sweep: early/rate tables use {1e-3 .. 1e-7}, long runs
// {1e-5, 1e-7}, the minimizer sweep {1e-1 .. 1e-5}.
std::vector<double> default_nus(const std::string& experiment);
// Table times: {0.5, 1, 5} for the smoothed kernel, {0.1, 0.5, 3} for the
// piecewise-quadratic one.
std::vector<double> default_times(PotentialKind kind);

// Worst-case conservation/positivity/dissipation figures aggregated over
// every solver run a driver performed, so batch results can be gated
// end-to-end without rerunning anything.
struct RunDiagnostics {
    double max_mass_drift = 0.0;       // finite-volume mass drift, max over runs
    double min_cell_value = 0.0;       // most negative finite-volume cell seen
    double fv_energy_rise_rate = 0.0;  // largest positive dE/dt between snapshots
    double particle_energy_rise_rate = 0.0;

    void absorb(const FVTrajectory& traj);
    void absorb(const ParticleTrajectory& traj);
    void merge(const RunDiagnostics& other);
};

struct EarlyRow {
    double nu, t, w2;
};
struct EarlyTable {
    PotentialKind potential;
    std::vector<double> times;
    std::vector<EarlyRow> rows;  // grouped by nu (sweep order), then by t
    RunDiagnostics diagnostics;
};

struct LongrunSeries {
    double nu;
    std::vector<double> times;
    std::vector<double> w2_to_particle;
    std::vector<double> w2_to_mubar;
    std::vector<double> energy_total;
    std::vector<double> event_times;  // boundary-mass detachment events
    double argmin_time = 0.0;         // time at which w2_to_mubar is smallest
};
struct LongrunResult {
    PotentialKind potential;
    bool particle_equilibrium_reached = false;
    double particle_equilibrium_time = 0.0;  // horizon when not reached
    std::vector<LongrunSeries> series;
    RunDiagnostics diagnostics;
};

struct MinimizerRow {
    double nu = 0.0;
    bool rejected = false;  // below the conditioning cutoff of the sweep
    double c1 = 0.0, c2 = 0.0, L = 0.0;
    double mass_residual = 0.0;
    double w2_to_plain_minimizer = 0.0;
    double boundary_layer_L = 0.0;       // c1 e^{L/s}
    double boundary_layer_L_m01 = 0.0;   // c1 e^{(L-0.01)/s}
};
struct MinimizerTable {
    std::vector<MinimizerRow> rows;
};

struct RateEstimate {
    double t = 0.0;
    double slope = 0.0;        // least-squares slope of log w2 against log nu
    double theoretical = 0.0;  // beta/2 from the a-priori bound
    bool warning_nonmonotone = false;
    int n_points = 0;
};

// Distance table d_W(diffusive(t), plain(t)) over the nu sweep at the table
// times; a requested time of zero reports zero (both solvers start from the
// same measure).
EarlyTable run_early(const ExperimentConfig& cfg);

// Long-run series against both the plain solution and its steady state,
// with detachment events and the closest-approach time per nu.  The steady
// state comes from a particle run over cfg.equilibrium_horizon; if the
// stopping tolerance is not met by then the result is flagged and the final
// state is used.
LongrunResult run_longrun(const ExperimentConfig& cfg);

// Diffusive-minimizer sweep; values of nu below 1e-5 are rejected as
// conditioning failures (rows flagged, sweep continues) to keep the sweep
// within the regime where the linear algebra is trustworthy.
MinimizerTable run_minimizers(const ExperimentConfig& cfg);

// Least-squares slope of log d_W vs log nu at a fixed table time, compared
// against the a-priori exponent beta/2, beta = min(alpha - m/3, 1/3) in one
// dimension.  Requires at least three rows at that time; non-monotone data
// sets the warning flag.
RateEstimate estimate_rate(const EarlyTable& table, double t, double alpha, double m_exp);

double theoretical_beta(double alpha, double m_exp);

// Deterministic CSV emission (5-digit scientific mantissas; tagged rows are
// prefixed with '!').
void write_early_csv(const EarlyTable& table, std::ostream& out);
void write_longrun_csv(const LongrunResult& result, std::ostream& out);
void write_minimizers_csv(const MinimizerTable& table, std::ostream& out);
void write_rates_csv(const std::vector<RateEstimate>& rates, std::ostream& out);

}  // namespace agglab
