#ifndef HSSD_SYNTHESIZE_HPP
#define HSSD_SYNTHESIZE_HPP

#include "hssd/dataset.hpp"
#include "hssd/hier_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hssd {

// Bioassay layout for the synthetic generator.
struct SynthDesign {
    std::vector<double> concentrations; // positive test levels
    int replicates = 3;
    int n_species = 10;
    int control_replicates = 3;
    double control_d = 1.5;      // true control response ratio
    double fluo_initial = 100.0; // constant; only ratios matter
    std::string contaminant = "synthetic";
};

struct SynthResult {
    BioassayDataset dataset;
    HyperParams theta; // generating hyperparameters (echo)
    std::vector<SpeciesParams> species;
    std::uint64_t seed = 0;
};

// Realizes the generative model: species (log10 b, log10 e) from the
// bivariate normal given theta, responses y = ln R + N(0, sigma_err) at
// every (concentration, replicate), noisy controls at concentration 0.
// With theta.sigma_err == 0 responses sit exactly on the curves.
SynthResult synthesize_dataset(const HyperParams& theta, const SynthDesign& design,
                               std::uint64_t seed);

} // namespace hssd

#endif // HSSD_SYNTHESIZE_HPP
