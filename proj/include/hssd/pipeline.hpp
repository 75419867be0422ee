#ifndef HSSD_PIPELINE_HPP
#define HSSD_PIPELINE_HPP

#include "hssd/classical_ssd.hpp"
#include "hssd/community.hpp"
#include "hssd/dataset.hpp"
#include "hssd/dose_response.hpp"
#include "hssd/mcmc.hpp"
#include "hssd/synthesize.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hssd {

// Simulation sizes; profile defaults below.
struct SimSizes {
    int n_theta_gec = 2000;
    int n_species_community = 30;
    int n_theta_ssd = 500;
    long n_species_large = 100000;
    int n_grid = 101;
};

struct RunConfig {
    std::string input;
    std::string out_dir = "hssd_out";
    std::string contaminant; // empty selects every contaminant
    ColumnMapping columns;
    ControlPooling pooling = ControlPooling::per_species;
    McmcConfig mcmc;
    SimSizes sim;
    std::vector<double> x_levels = {10.0, 50.0}; // EC_x / GEC_x levels
    double hc_percent = 5.0;
    int n_boot_ec = 500;
    int n_boot_hc = 1000;
    std::uint64_t seed = 1;
    std::string profile = "test"; // "test" or "paper"
    int threads = 1;
    bool override_convergence = false;

    // Applies the profile's MCMC and simulation sizes. The paper profile
    // uses the published run lengths (500k iterations, thin 40, 10k theta
    // draws, 4e6 species); the test profile is desk-scale.
    void apply_profile();
};

struct CurveRow {
    CurveFit fit;
    EcEstimate ec10;
    EcEstimate ec50;
    bool has_intervals = false; // false for non-converged fits
};

struct FitCurvesResult {
    std::vector<CurveRow> rows;
    std::vector<std::string> files;
};

// Fits every (species, contaminant) pair passing the filter and writes
// curves.csv. Non-convergent curves are reported, not fatal.
FitCurvesResult cmd_fit_curves(const RunConfig& cfg);

struct ClassicalSsdPerX {
    double x = 0.0;
    LognormalSsd ssd;
    HcEstimate hc;
    int n_curves_used = 0;
    std::string contaminant;
};

struct ClassicalSsdResult {
    std::vector<ClassicalSsdPerX> per_x;
    std::vector<std::string> files;
};

// Classical baseline: lognormal SSD on point EC_x values per contaminant
// and effect level (uncertainty on the ECs deliberately not propagated).
ClassicalSsdResult cmd_classical_ssd(const RunConfig& cfg);

struct FitHierResult {
    std::vector<PosteriorSample> posteriors; // one per contaminant
    std::vector<std::string> files;
};

FitHierResult cmd_fit_hier(const RunConfig& cfg);

struct SimulateResult {
    std::vector<GlobalResponseResult> global_per_x;
    std::vector<HierSsdResult> ssd_per_x;
    CurveBand hc_vs_x_band;
    std::vector<std::string> files;
};

// Posterior-predictive stage from persisted posterior files. Refuses to
// run when the Gelman-Rubin gate (< 1.05 on every hyperparameter) fails,
// unless override_convergence is set.
SimulateResult cmd_simulate(const RunConfig& cfg, const std::string& posterior_csv,
                            const std::string& diagnostics_json);

// Writes a synthetic dataset realizing the generative model plus a ground
// truth sidecar JSON.
std::vector<std::string> cmd_synthesize(const RunConfig& cfg, const HyperParams& theta,
                                        const SynthDesign& design);

// Full pipeline per contaminant: curves, classical SSD, hierarchical fit,
// simulations, and one machine-readable run report.
std::vector<std::string> cmd_report(const RunConfig& cfg);

} // namespace hssd

#endif // HSSD_PIPELINE_HPP
