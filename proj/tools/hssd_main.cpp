// Command-line front end: dataset -> curve fits -> classical SSD ->
// hierarchical fit -> posterior-predictive simulation, plus the synthetic
// data generator used for validation.

#include "hssd/errors.hpp"
#include "hssd/pipeline.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CliState {
    hssd::RunConfig cfg;
    // raw override slots; applied after the profile defaults
    long n_iter = 0;
    int thin = 0;
    int n_chains = 0;
    double burn_in = -1.0;
    int adapt_window = 0;
    int n_theta_gec = 0;
    int n_species_community = 0;
    int n_theta_ssd = 0;
    long n_species_large = 0;
    int n_grid = 0;
    std::string delimiter = ",";
    bool pool_per_contaminant = false;
};

void add_common_options(CLI::App& cmd, CliState& st) {
    cmd.add_option("-i,--input", st.cfg.input, "Input bioassay CSV");
    cmd.add_option("-o,--out", st.cfg.out_dir, "Output directory")->capture_default_str();
    cmd.add_option("-c,--contaminant", st.cfg.contaminant,
                   "Restrict to one contaminant (default: all)");
    cmd.add_option("--seed", st.cfg.seed, "Master RNG seed")->capture_default_str();
    cmd.add_option("--profile", st.cfg.profile, "Size profile: test or paper")
        ->check(CLI::IsMember({"test", "paper"}))
        ->capture_default_str();
    cmd.add_option("--threads", st.cfg.threads, "Worker threads (results are thread-count "
                                                "independent)")
        ->capture_default_str();
    cmd.add_option("--x", st.cfg.x_levels, "Effect levels x in percent")->capture_default_str();
    cmd.add_option("--p", st.cfg.hc_percent, "HC percentile p")->capture_default_str();
    cmd.add_option("--n-boot-ec", st.cfg.n_boot_ec, "Bootstrap resamples per EC interval")
        ->capture_default_str();
    cmd.add_option("--n-boot-hc", st.cfg.n_boot_hc, "Bootstrap resamples per HC interval")
        ->capture_default_str();
    cmd.add_flag("--override-convergence", st.cfg.override_convergence,
                 "Simulate even when the Gelman-Rubin gate fails");

    cmd.add_option("--col-species", st.cfg.columns.species, "Species column name");
    cmd.add_option("--col-contaminant", st.cfg.columns.contaminant, "Contaminant column name");
    cmd.add_option("--col-concentration", st.cfg.columns.concentration,
                   "Concentration column name");
    cmd.add_option("--col-replicate", st.cfg.columns.replicate, "Replicate column name");
    cmd.add_option("--col-fluo-initial", st.cfg.columns.fluo_initial,
                   "Initial fluorescence column name");
    cmd.add_option("--col-fluo-final", st.cfg.columns.fluo_final,
                   "Final fluorescence column name");
    cmd.add_option("--control-label-column", st.cfg.columns.control_label_column,
                   "Column whose value marks control rows (instead of concentration 0)");
    cmd.add_option("--control-label-value", st.cfg.columns.control_label_value,
                   "Value in the control label column that marks controls");
    cmd.add_option("--delimiter", st.delimiter, "Field delimiter")->capture_default_str();
    cmd.add_flag("--pool-controls-per-contaminant", st.pool_per_contaminant,
                 "Estimate d per (species, contaminant) instead of per species");

    cmd.add_option("--iters", st.n_iter, "MCMC iterations per chain (profile default)");
    cmd.add_option("--thin", st.thin, "Keep one draw in this many");
    cmd.add_option("--chains", st.n_chains, "Number of MCMC chains");
    cmd.add_option("--burn-in", st.burn_in, "Burn-in fraction of iterations");
    cmd.add_option("--adapt-window", st.adapt_window, "Adaptation monitoring window");
    cmd.add_option("--n-theta-gec", st.n_theta_gec, "Posterior draws for the global response");
    cmd.add_option("--n-species-community", st.n_species_community,
                   "Species per simulated community");
    cmd.add_option("--n-theta-ssd", st.n_theta_ssd, "Posterior draws for the hierarchical SSD");
    cmd.add_option("--n-species-large", st.n_species_large,
                   "Species per large community (SSD percentiles)");
    cmd.add_option("--n-grid", st.n_grid, "Concentration grid points for bands");
}

void finalize_config(CLI::App& cmd, CliState& st) {
    st.cfg.apply_profile();
    if (cmd.count("--iters")) st.cfg.mcmc.n_iter = st.n_iter;
    if (cmd.count("--thin")) st.cfg.mcmc.thin = st.thin;
    if (cmd.count("--chains")) st.cfg.mcmc.n_chains = st.n_chains;
    if (cmd.count("--burn-in")) st.cfg.mcmc.burn_in_fraction = st.burn_in;
    if (cmd.count("--adapt-window")) st.cfg.mcmc.adapt_window = st.adapt_window;
    if (cmd.count("--n-theta-gec")) st.cfg.sim.n_theta_gec = st.n_theta_gec;
    if (cmd.count("--n-species-community")) {
        st.cfg.sim.n_species_community = st.n_species_community;
    }
    if (cmd.count("--n-theta-ssd")) st.cfg.sim.n_theta_ssd = st.n_theta_ssd;
    if (cmd.count("--n-species-large")) st.cfg.sim.n_species_large = st.n_species_large;
    if (cmd.count("--n-grid")) st.cfg.sim.n_grid = st.n_grid;
    if (!st.delimiter.empty()) st.cfg.columns.delimiter = st.delimiter[0];
    st.cfg.pooling = st.pool_per_contaminant ? hssd::ControlPooling::per_species_contaminant
                                             : hssd::ControlPooling::per_species;
    st.cfg.mcmc.seed = st.cfg.seed;
    st.cfg.mcmc.threads = st.cfg.threads;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical Bayesian species sensitivity distribution toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key = value option file (flags override it)");

    CliState st;

    auto* fit_curves = app.add_subcommand(
        "fit-curves", "Per-species loglogistic fits with bootstrap EC10/EC50 intervals");
    add_common_options(*fit_curves, st);

    auto* classical = app.add_subcommand(
        "classical-ssd", "Lognormal SSD on point EC_x values with bootstrap HC intervals");
    add_common_options(*classical, st);

    auto* fit_hier =
        app.add_subcommand("fit-hier", "Hierarchical Bayesian fit (adaptive MCMC) per contaminant");
    add_common_options(*fit_hier, st);

    auto* simulate = app.add_subcommand(
        "simulate", "Posterior-predictive global response, hierarchical SSD and HC-vs-x");
    add_common_options(*simulate, st);
    std::string posterior_path, diagnostics_path;
    simulate->add_option("--posterior", posterior_path, "Posterior CSV from fit-hier")->required();
    simulate->add_option("--diagnostics", diagnostics_path, "Diagnostics JSON from fit-hier")
        ->required();

    auto* report = app.add_subcommand(
        "report", "Full pipeline: curves, classical SSD, hierarchical fit, simulations, report");
    add_common_options(*report, st);

    auto* synthesize =
        app.add_subcommand("synthesize", "Generate a synthetic dataset from the generative model");
    add_common_options(*synthesize, st);
    hssd::HyperParams theta;
    theta.mu_logb = 0.16;
    theta.sigma_logb = 0.46;
    theta.mu_loge = 2.49;
    theta.sigma_loge = 1.07;
    theta.rho = 0.83;
    theta.sigma_err = 0.3;
    hssd::SynthDesign design;
    design.concentrations = {0.1, 0.72, 5.18, 37.28, 268.27, 1930.7, 13894.95, 100000.0};
    synthesize->add_option("--mu-logb", theta.mu_logb, "True mu_log10(b)")->capture_default_str();
    synthesize->add_option("--sigma-logb", theta.sigma_logb, "True sigma_log10(b)")
        ->capture_default_str();
    synthesize->add_option("--mu-loge", theta.mu_loge, "True mu_log10(e)")->capture_default_str();
    synthesize->add_option("--sigma-loge", theta.sigma_loge, "True sigma_log10(e)")
        ->capture_default_str();
    synthesize->add_option("--rho", theta.rho, "True correlation of (log b, log e)")
        ->capture_default_str();
    synthesize->add_option("--sigma-err", theta.sigma_err, "Residual sd on the ln scale")
        ->capture_default_str();
    synthesize->add_option("--concentrations", design.concentrations, "Tested concentrations")
        ->capture_default_str();
    synthesize->add_option("--replicates", design.replicates, "Replicates per concentration")
        ->capture_default_str();
    synthesize->add_option("--n-species", design.n_species, "Species count")
        ->capture_default_str();
    synthesize->add_option("--control-replicates", design.control_replicates,
                           "Control replicates per species")
        ->capture_default_str();
    synthesize->add_option("--control-d", design.control_d, "True control response ratio")
        ->capture_default_str();
    synthesize->add_option("--contaminant-name", design.contaminant,
                           "Contaminant id written into the dataset")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        CliState* state = &st;
        finalize_config(*active, *state);
        const hssd::RunConfig& cfg = state->cfg;

        auto require_input = [&]() {
            if (cfg.input.empty()) throw hssd::Error("missing --input (no dataset given)");
        };

        if (active == fit_curves) {
            require_input();
            hssd::cmd_fit_curves(cfg);
        } else if (active == classical) {
            require_input();
            hssd::cmd_classical_ssd(cfg);
        } else if (active == fit_hier) {
            require_input();
            hssd::cmd_fit_hier(cfg);
        } else if (active == simulate) {
            hssd::cmd_simulate(cfg, posterior_path, diagnostics_path);
        } else if (active == report) {
            require_input();
            hssd::cmd_report(cfg);
        } else if (active == synthesize) {
            hssd::cmd_synthesize(cfg, theta, design);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
