// Command-line driver for the aggregation-diffusion laboratory.
//
// Subcommands: early (distance tables at early times), longrun (distance and
// energy series with detachment events), minimizers (diffusive-minimizer
// sweep), rate (empirical convergence order).  Options may come from a JSON
// config file; explicit flags override file values.  All output is CSV in
// the chosen directory; failures print a machine-readable JSON error record
// to stderr and exit nonzero.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "agglab/equilibria.hpp"
#include "agglab/experiments.hpp"

namespace {

struct RawOptions {
    std::string potential;
    std::vector<double> nus;
    double m_exp = 0.0;
    double alpha = 0.0;
    int cells = 0;
    std::string out_dir;
    std::string config_path;

    CLI::Option* potential_opt = nullptr;
    CLI::Option* nu_opt = nullptr;
    CLI::Option* m_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* cells_opt = nullptr;
    CLI::Option* out_opt = nullptr;
};

void add_common_options(CLI::App* cmd, RawOptions& raw) {
    raw.potential_opt = cmd->add_option("--potential", raw.potential,
                                        "interaction kernel: c0 (piecewise quadratic) or c2 "
                                        "(smoothed)")
                            ->check(CLI::IsMember({"c0", "c2"}));
    raw.nu_opt = cmd->add_option("--nu", raw.nus, "diffusivity sweep, strictly decreasing");
    raw.m_opt = cmd->add_option("--m", raw.m_exp, "diffusion exponent m > 1");
    raw.alpha_opt = cmd->add_option("--alpha", raw.alpha, "diffusivity exponent alpha");
    raw.cells_opt = cmd->add_option("--cells", raw.cells, "finite-volume cell count");
    raw.out_opt = cmd->add_option("--out", raw.out_dir, "output directory for CSV artifacts");
    cmd->add_option("--config", raw.config_path, "JSON config file (flags override it)");
}

agglab::PotentialSpec parse_potential(const std::string& name) {
    return name == "c2" ? agglab::PotentialSpec::c2() : agglab::PotentialSpec::c0();
}

void apply_config_file(agglab::ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("potential")) cfg.potential = parse_potential(j["potential"].get<std::string>());
    if (j.contains("nu")) cfg.nus = j["nu"].get<std::vector<double>>();
    if (j.contains("m")) cfg.m_exp = j["m"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("cells")) cfg.cells = j["cells"].get<int>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("times")) cfg.times = j["times"].get<std::vector<double>>();
    if (j.contains("n_particles")) cfg.n_particles = j["n_particles"].get<int>();
    if (j.contains("particle_dt")) cfg.particle_dt = j["particle_dt"].get<double>();
    if (j.contains("longrun_t_end")) cfg.longrun_t_end = j["longrun_t_end"].get<double>();
    if (j.contains("longrun_cadence")) cfg.longrun_cadence = j["longrun_cadence"].get<double>();
    if (j.contains("equilibrium_horizon"))
        cfg.equilibrium_horizon = j["equilibrium_horizon"].get<double>();
}

agglab::ExperimentConfig build_config(const RawOptions& raw, const std::string& experiment) {
    agglab::ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (!raw.config_path.empty()) apply_config_file(cfg, raw.config_path);
    if (raw.potential_opt->count() > 0) cfg.potential = parse_potential(raw.potential);
    if (raw.nu_opt->count() > 0) cfg.nus = raw.nus;
    if (raw.m_opt->count() > 0) cfg.m_exp = raw.m_exp;
    if (raw.alpha_opt->count() > 0) cfg.alpha = raw.alpha;
    if (raw.cells_opt->count() > 0) cfg.cells = raw.cells;
    if (raw.out_opt->count() > 0) cfg.out_dir = raw.out_dir;
    return cfg;
}

std::ofstream open_output(const agglab::ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::string potential_suffix(const agglab::ExperimentConfig& cfg) {
    return cfg.potential.kind == agglab::PotentialKind::C2Regularized ? "c2" : "c0";
}

int run_command(const std::string& experiment, const RawOptions& raw) {
    const agglab::ExperimentConfig cfg = build_config(raw, experiment);
    if (experiment == "early") {
        const agglab::EarlyTable table = agglab::run_early(cfg);
        auto out = open_output(cfg, "early_" + potential_suffix(cfg) + ".csv");
        agglab::write_early_csv(table, out);
    } else if (experiment == "longrun") {
        const agglab::LongrunResult result = agglab::run_longrun(cfg);
        auto out = open_output(cfg, "longrun_" + potential_suffix(cfg) + ".csv");
        agglab::write_longrun_csv(result, out);
    } else if (experiment == "minimizers") {
        const agglab::MinimizerTable table = agglab::run_minimizers(cfg);
        auto out = open_output(cfg, "minimizers.csv");
        agglab::write_minimizers_csv(table, out);
    } else {  // rate
        agglab::ExperimentConfig ecfg = cfg;
        ecfg.experiment = "early";
        const agglab::EarlyTable table = agglab::run_early(ecfg);
        std::vector<agglab::RateEstimate> rates;
        for (double t : table.times)
            if (t > 0.0) rates.push_back(agglab::estimate_rate(table, t, cfg.alpha, cfg.m_exp));
        auto out = open_output(cfg, "rate_" + potential_suffix(cfg) + ".csv");
        agglab::write_rates_csv(rates, out);
    }
    return 0;
}

const char* error_type(const std::exception& e) {
    if (dynamic_cast<const agglab::EquilibriumConditioningError*>(&e)) return "conditioning_error";
    if (dynamic_cast<const agglab::EquilibriumConvergenceError*>(&e)) return "convergence_error";
    if (dynamic_cast<const std::domain_error*>(&e)) return "domain_error";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    if (dynamic_cast<const std::runtime_error*>(&e)) return "runtime_error";
    return "exception";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aggregation-diffusion numerical laboratory"};
    app.require_subcommand(1);

    RawOptions raw_early, raw_longrun, raw_minimizers, raw_rate;
    add_common_options(app.add_subcommand("early", "distance tables at early times"), raw_early);
    add_common_options(app.add_subcommand("longrun", "long-run distance and energy series"),
                       raw_longrun);
    add_common_options(app.add_subcommand("minimizers", "diffusive-minimizer sweep"),
                       raw_minimizers);
    add_common_options(app.add_subcommand("rate", "empirical convergence order"), raw_rate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("early")) return run_command("early", raw_early);
        if (app.got_subcommand("longrun")) return run_command("longrun", raw_longrun);
        if (app.got_subcommand("minimizers")) return run_command("minimizers", raw_minimizers);
        return run_command("rate", raw_rate);
    } catch (const std::exception& e) {
        nlohmann::json err = {{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
}
