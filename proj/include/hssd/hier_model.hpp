#ifndef HSSD_HIER_MODEL_HPP
#define HSSD_HIER_MODEL_HPP

#include "hssd/dataset.hpp"

#include <string>
#include <vector>

namespace hssd {

// Community-level parameters. (log10 b, log10 e) of a species is bivariate
// normal with means (mu_logb, mu_loge), sds (sigma_logb, sigma_loge) and
// correlation rho; sigma_err is the ln-scale residual sd of the error
// model.
struct HyperParams {
    double mu_logb = 0.0;
    double sigma_logb = 1.0;
    double mu_loge = 0.0;
    double sigma_loge = 1.0;
    double rho = 0.0;
    double sigma_err = 0.5;
};

// (log10 b_j, log10 e_j) for one species.
struct SpeciesParams {
    std::string species_id;
    double log_b = 0.0;
    double log_e = 0.0;
};

// Hyperparameter priors. All fixed except the prior on mu_loge, which is
// centred on the middle of the tested concentration range with an sd that
// puts 95% of its mass inside that range. The prior on sigma_logb is
// half-normal (the positive-support reading of a normal prior on an sd).
struct PriorSpec {
    double mu_logb_mean = -6.0;
    double mu_logb_sd = 6.0;
    double sigma_logb_scale = 10.0; // half-normal scale
    double mu_loge_mean = 0.0;      // mu_logC, from the data
    double mu_loge_sd = 1.0;        // sigma_logC, from the data
    double sigma_loge_max = 10.0;   // U(0, max)
    double sigma_err_max = 2.0;     // U(0, max)

    // mu_logC = (log10 cmin + log10 cmax)/2, sigma_logC = (log10 cmax -
    // log10 cmin)/4 over all positive tested concentrations.
    static PriorSpec from_concentrations(std::span<const double> positive_concentrations);

    bool in_support(const HyperParams& h) const;
};

// Per-species fitting data for one contaminant: control level d plus the
// (ln C, y) pairs.
struct SpeciesObservations {
    std::string species_id;
    double d = 1.0;
    std::vector<double> concentration;
    std::vector<double> log_conc; // natural log
    std::vector<double> y;
};

struct HierData {
    std::string contaminant_id;
    std::vector<SpeciesObservations> species; // sorted by species_id
    double c_min = 0.0;                       // positive tested range
    double c_max = 0.0;

    std::size_t total_observations() const;

    // Groups response points by species and attaches controls. All points
    // must belong to a single contaminant.
    static HierData from_responses(const std::vector<ResponsePoint>& points,
                                   const std::vector<ControlSummary>& controls);
};

// Residual sum of squares of species j's observations at (log10 b, log10 e).
double species_sse(const SpeciesObservations& sp, double log_b, double log_e);

// Bivariate normal log-density of (log_b, log_e) under the hyperparameters.
double species_level_log_density(double log_b, double log_e, const HyperParams& h);

// Log-density of the Table-of-priors product at h; -inf outside support.
double hyper_prior_log_density(const HyperParams& h, const PriorSpec& priors);

// Full unnormalized log-posterior: species-level bivariate terms +
// ln-likelihood of every observation + hyperparameter priors. States
// outside the prior support give -inf, never an exception. All constant
// terms are kept, so the value is comparable across any two states.
double log_posterior(const HyperParams& h, const std::vector<SpeciesParams>& species,
                     const HierData& data, const PriorSpec& priors);

} // namespace hssd

#endif // HSSD_HIER_MODEL_HPP
