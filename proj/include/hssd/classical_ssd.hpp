#ifndef HSSD_CLASSICAL_SSD_HPP
#define HSSD_CLASSICAL_SSD_HPP

#include <cstdint>
#include <span>

namespace hssd {

// Lognormal SSD fitted to per-species EC_x values by maximum likelihood.
// mu/sigma are on the log10 scale; sigma uses the 1/n MLE form.
struct LognormalSsd {
    double mu_log10 = 0.0;
    double sigma_log10 = 0.0;
    int n_species = 0;
};

struct HcEstimate {
    double p = 0.0;     // percent of the community
    double point = 0.0; // concentration
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_boot = 0;
};

LognormalSsd fit_lognormal(std::span<const double> ecs);

// HC_p = 10^(mu + z_{p/100} * sigma).
double hc_p(const LognormalSsd& ssd, double p);

// Fraction of species affected at a concentration (the SSD curve).
double fraction_affected(const LognormalSsd& ssd, double concentration);

// Species-level case bootstrap of HC_p: resample EC values with
// replacement, refit, take 2.5/97.5 percentiles. Degenerate resamples
// (zero variance) are dropped; more than 20% dropped is an error.
HcEstimate bootstrap_hc(std::span<const double> ecs, double p, int n_boot, std::uint64_t seed);

} // namespace hssd

#endif // HSSD_CLASSICAL_SSD_HPP
