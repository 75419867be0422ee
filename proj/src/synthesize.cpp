#include "hssd/synthesize.hpp"

#include "hssd/dose_response.hpp"
#include "hssd/errors.hpp"
#include "hssd/rng.hpp"

#include <cmath>
#include <cstdio>

namespace hssd {

SynthResult synthesize_dataset(const HyperParams& theta, const SynthDesign& design,
                               std::uint64_t seed) {
    if (design.n_species < 1 || design.replicates < 1 || design.control_replicates < 1) {
        throw DomainError("synthesize_dataset: counts must be positive");
    }
    if (design.concentrations.empty()) {
        throw DomainError("synthesize_dataset: no test concentrations");
    }
    for (double c : design.concentrations) {
        if (!(c > 0.0)) throw DomainError("synthesize_dataset: concentrations must be > 0");
    }
    if (!(design.control_d > 0.0)) throw DomainError("synthesize_dataset: control_d must be > 0");
    if (theta.sigma_err < 0.0 || !(theta.sigma_logb > 0.0) || !(theta.sigma_loge > 0.0) ||
        std::fabs(theta.rho) >= 1.0) {
        throw DomainError("synthesize_dataset: invalid hyperparameters");
    }

    SynthResult res;
    res.theta = theta;
    res.seed = seed;
    const double rho_c = std::sqrt(1.0 - theta.rho * theta.rho);

    for (int j = 0; j < design.n_species; ++j) {
        RngStream rng(seed, RngDomain::synthesis, static_cast<std::uint64_t>(j));
        char name[16];
        std::snprintf(name, sizeof name, "sp%03d", j + 1);

        const double z1 = rng.normal();
        const double z2 = rng.normal();
        SpeciesParams sp;
        sp.species_id = name;
        sp.log_b = theta.mu_logb + theta.sigma_logb * z1;
        sp.log_e = theta.mu_loge + theta.sigma_loge * (theta.rho * z1 + rho_c * z2);
        res.species.push_back(sp);
        const double b = std::pow(10.0, sp.log_b);
        const double e = std::pow(10.0, sp.log_e);

        for (int r = 0; r < design.control_replicates; ++r) {
            Observation o;
            o.species_id = name;
            o.contaminant_id = design.contaminant;
            o.concentration = 0.0;
            o.replicate = r + 1;
            o.fluo_initial = design.fluo_initial;
            const double y = std::log(design.control_d) + theta.sigma_err * rng.normal();
            o.fluo_final = design.fluo_initial * std::exp(y);
            res.dataset.observations.push_back(std::move(o));
        }
        for (double conc : design.concentrations) {
            for (int r = 0; r < design.replicates; ++r) {
                Observation o;
                o.species_id = name;
                o.contaminant_id = design.contaminant;
                o.concentration = conc;
                o.replicate = r + 1;
                o.fluo_initial = design.fluo_initial;
                const double mean_y =
                    std::log(design.control_d) - softplus(b * std::log(conc / e));
                const double y = mean_y + theta.sigma_err * rng.normal();
                o.fluo_final = design.fluo_initial * std::exp(y);
                res.dataset.observations.push_back(std::move(o));
            }
        }
    }
    return res;
}

} // namespace hssd
