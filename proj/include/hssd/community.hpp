#ifndef HSSD_COMMUNITY_HPP
#define HSSD_COMMUNITY_HPP

#include "hssd/classical_ssd.hpp"
#include "hssd/mcmc.hpp"
#include "hssd/rng.hpp"

#include <cstdint>
#include <vector>

namespace hssd {

// A simulated community: species (b, e) pairs drawn from the bivariate
// normal on (log10 b, log10 e) given one set of hyperparameters.
struct CommunityDraw {
    HyperParams theta;
    std::vector<double> b;
    std::vector<double> e;
};

struct CurveBand {
    enum class Kind { global_response, ssd_fraction_affected, hc5_vs_x };
    Kind kind = Kind::global_response;
    std::vector<double> grid; // concentrations, or x levels for hc5_vs_x
    std::vector<double> lo;   // 2.5th percentile
    std::vector<double> median;
    std::vector<double> hi;   // 97.5th percentile
};

struct GecEstimate {
    double x = 0.0;
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

CommunityDraw draw_community(const HyperParams& theta, int n_species, RngStream& rng);

// Mean over species of R_i(C)/R_i(0) = 1/(1 + (C/e_i)^{b_i}); the control
// levels cancel, so the global response never depends on d.
double r_tot(const CommunityDraw& community, double concentration);

struct GlobalResponseOptions {
    int n_theta = 10000;
    int n_species = 30;
    std::uint64_t seed = 1;
    int n_grid = 101;
    double grid_lo = 0.0; // concentration grid bounds; usually
    double grid_hi = 0.0; // [min tested C / 100, max tested C * 100]
    int threads = 1;
};

struct GlobalResponseResult {
    GecEstimate gec;
    CurveBand band; // kind = global_response
};

// Posterior-predictive global response: one finite community per selected
// posterior draw, r_tot band over the grid, and the concentration where
// r_tot = 1 - x/100 (GEC_x) summarized by median and 2.5/97.5 percentiles.
GlobalResponseResult global_response(const PosteriorSample& posterior, double x,
                                     const GlobalResponseOptions& opt);

struct HierSsdOptions {
    int n_theta = 2000;
    long n_species = 100000; // 4e6 in the paper profile
    double p = 5.0;          // HC percentile
    std::uint64_t seed = 1;
    int n_grid = 101;
    double grid_lo = 0.0;
    double grid_hi = 0.0;
    int threads = 1;
};

struct HierSsdResult {
    HcEstimate hc;
    CurveBand band; // kind = ssd_fraction_affected
};

// Uncertainty-propagating SSD: per posterior draw simulate a large
// community, transform every species to its EC_x, take the p-th percentile
// as that draw's HC_p; the band is the fraction of species affected per
// grid concentration, summarized across draws.
HierSsdResult hierarchical_ssd(const PosteriorSample& posterior, double x,
                               const HierSsdOptions& opt);

// HC_p as a function of the effect level x. Each posterior draw reuses one
// community across the whole x grid, so the per-draw curve is internally
// consistent (and monotone in x).
CurveBand hc_vs_x(const PosteriorSample& posterior, const std::vector<double>& x_grid,
                  const HierSsdOptions& opt);

// Log-spaced concentration grid helper.
std::vector<double> log_grid(double lo, double hi, int n);

} // namespace hssd

#endif // HSSD_COMMUNITY_HPP
