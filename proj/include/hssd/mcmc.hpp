#ifndef HSSD_MCMC_HPP
#define HSSD_MCMC_HPP

#include "hssd/hier_model.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hssd {

struct McmcConfig {
    long n_iter = 500000; // total iterations per chain, burn-in included
    int thin = 40;
    int n_chains = 3;
    double burn_in_fraction = 0.5;
    std::uint64_t seed = 1;
    int adapt_window = 50; // acceptance monitoring window during burn-in
    int threads = 1;       // chains run in parallel up to this many threads
};

// Per proposal block: post-burn-in acceptance rate and final proposal scale.
struct BlockStats {
    std::string name;
    double acceptance_rate = 0.0;
    double scale = 0.0;
};

// Row-major draw storage, one row per retained draw.
struct DrawMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        data.assign(r * c, 0.0);
    }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Thinned post-burn-in draws from every chain plus sampler diagnostics.
// Column layout: mu_logb, sigma_logb, mu_loge, sigma_loge, rho, sigma_err,
// then (logb_<id>, loge_<id>) per species.
struct PosteriorSample {
    static constexpr std::array<const char*, 6> hyper_names = {
        "mu_logb", "sigma_logb", "mu_loge", "sigma_loge", "rho", "sigma_err"};

    McmcConfig config;
    PriorSpec priors;
    std::string contaminant_id;
    std::vector<std::string> species_ids;
    std::vector<std::string> columns;
    std::vector<long> iterations; // source iteration of each retained row
    std::vector<DrawMatrix> chains;
    std::vector<std::vector<BlockStats>> block_stats; // per chain
    std::map<std::string, double> gelman_rubin_stat;  // per hyperparameter
    std::vector<std::string> warnings;
    double data_c_min = 0.0;
    double data_c_max = 0.0;

    std::size_t n_kept_per_chain() const { return chains.empty() ? 0 : chains.front().rows; }
    std::size_t total_draws() const;
    HyperParams hyper(std::size_t chain, std::size_t row) const;
    std::vector<double> column(std::size_t chain, std::size_t col) const;
    std::vector<double> pooled_column(std::size_t col) const;
    bool converged(double threshold = 1.05) const;
};

// Adaptive Metropolis-within-Gibbs over per-species (log b, log e) pairs
// (joint 2-d proposals) and single-hyperparameter blocks. Sampling runs on
// an unbounded parameterization (log sds, atanh rho) with the matching
// change-of-variables terms; proposal scales follow a Robbins-Monro rule
// toward 0.35 (pair blocks) / 0.44 (scalars) acceptance and freeze after
// burn-in. Chain c draws from the stream derived from (seed, c), so output
// is identical however chains are scheduled.
PosteriorSample run_mcmc(const HierData& data, const PriorSpec& priors, const McmcConfig& config);

// Potential scale reduction factor from >= 2 equal-length scalar chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// One row of the prior/posterior width comparison.
struct PriorPosteriorRow {
    std::string name;
    double prior_sd = 0.0;
    double posterior_sd = 0.0;
    double ratio = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
    bool data_weak = false;          // posterior sd > 75% of prior sd
    bool natural_constraint = false; // rho: bounded prior, shrinkage expected
};

std::vector<PriorPosteriorRow> prior_posterior_report(const PosteriorSample& sample,
                                                      const PriorSpec& priors);

} // namespace hssd

#endif // HSSD_MCMC_HPP
