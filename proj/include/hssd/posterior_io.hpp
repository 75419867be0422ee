#ifndef HSSD_POSTERIOR_IO_HPP
#define HSSD_POSTERIOR_IO_HPP

#include "hssd/mcmc.hpp"

#include <string>

namespace hssd {

// Columnar CSV, one row per retained draw: chain, iter, the six
// hyperparameters, then (logb_<id>, loge_<id>) per species.
void write_posterior_csv(const PosteriorSample& sample, const std::string& path);

// JSON sidecar: seed/config echo, acceptance rates, Gelman-Rubin values,
// warnings, species ids, tested concentration range and priors, which the
// simulation stage needs to rebuild grids and gates.
void write_diagnostics_json(const PosteriorSample& sample, const std::string& path);

// Rebuilds a PosteriorSample from the two files; validates that the CSV
// species columns agree with the sidecar.
PosteriorSample load_posterior(const std::string& csv_path, const std::string& diagnostics_path);

} // namespace hssd

#endif // HSSD_POSTERIOR_IO_HPP
