#ifndef HSSD_TEST_HELPERS_HPP
#define HSSD_TEST_HELPERS_HPP

#include "hssd/dataset.hpp"
#include "hssd/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace hssd_test {

// Synthetic response points straight from the error model: y = ln(d / (1 +
// (C/e)^b)) + sigma * z. Written independently of the library fit path
// (plain pow, no softplus) so it can serve as an oracle input.
inline std::vector<hssd::ResponsePoint> synth_points(double b, double e, double d,
                                                     const std::vector<double>& concentrations,
                                                     int replicates, double sigma,
                                                     std::uint64_t seed,
                                                     const std::string& species = "sp",
                                                     const std::string& contaminant = "synth") {
    hssd::RngStream rng(seed);
    std::vector<hssd::ResponsePoint> pts;
    for (double c : concentrations) {
        for (int r = 0; r < replicates; ++r) {
            const double mean = std::log(d / (1.0 + std::pow(c / e, b)));
            pts.push_back({species, contaminant, c, mean + sigma * rng.normal()});
        }
    }
    return pts;
}

inline std::vector<double> geometric_concentrations(double lo, double hi, int n) {
    std::vector<double> cs(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) cs[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    return cs;
}

} // namespace hssd_test

#endif // HSSD_TEST_HELPERS_HPP
