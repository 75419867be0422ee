#include "hssd/classical_ssd.hpp"

#include "hssd/errors.hpp"
#include "hssd/rng.hpp"
#include "hssd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hssd {

LognormalSsd fit_lognormal(std::span<const double> ecs) {
    if (ecs.size() < 3) {
        throw InsufficientDataError("fit_lognormal needs >= 3 values, got " +
                                    std::to_string(ecs.size()));
    }
    std::vector<double> logs;
    logs.reserve(ecs.size());
    for (double v : ecs) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError("fit_lognormal: all EC values must be positive and finite");
        }
        logs.push_back(std::log10(v));
    }
    const double mu = stats::mean(logs);
    double ss = 0.0;
    for (double l : logs) ss += (l - mu) * (l - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(logs.size()));
    if (!(sigma > 0.0)) {
        throw DegenerateSampleError("fit_lognormal: sample has zero variance on the log scale");
    }
    return LognormalSsd{mu, sigma, static_cast<int>(ecs.size())};
}

double hc_p(const LognormalSsd& ssd, double p) {
    if (!(p > 0.0 && p < 100.0)) throw DomainError("hc_p: p must lie in (0, 100)");
    return std::pow(10.0, ssd.mu_log10 + stats::normal_quantile(p / 100.0) * ssd.sigma_log10);
}

double fraction_affected(const LognormalSsd& ssd, double concentration) {
    if (!(concentration > 0.0)) throw DomainError("fraction_affected: concentration must be > 0");
    return stats::normal_cdf((std::log10(concentration) - ssd.mu_log10) / ssd.sigma_log10);
}

HcEstimate bootstrap_hc(std::span<const double> ecs, double p, int n_boot, std::uint64_t seed) {
    if (n_boot < 1000) throw DomainError("bootstrap_hc requires n_boot >= 1000");
    const LognormalSsd base = fit_lognormal(ecs);
    const double point = hc_p(base, p);

    std::vector<double> hcs;
    hcs.reserve(static_cast<std::size_t>(n_boot));
    int dropped = 0;
    std::vector<double> resample(ecs.size());
    for (int rep = 0; rep < n_boot; ++rep) {
        RngStream rng(seed, RngDomain::bootstrap, static_cast<std::uint64_t>(rep));
        for (auto& v : resample) v = ecs[rng.uniform_int(ecs.size())];
        try {
            hcs.push_back(hc_p(fit_lognormal(resample), p));
        } catch (const DegenerateSampleError&) {
            ++dropped;
        }
    }
    if (static_cast<double>(dropped) > 0.2 * static_cast<double>(n_boot)) {
        throw DegenerateSampleError("bootstrap_hc: " + std::to_string(dropped) + "/" +
                                    std::to_string(n_boot) + " resamples were degenerate");
    }
    std::sort(hcs.begin(), hcs.end());
    HcEstimate est;
    est.p = p;
    est.point = point;
    est.ci_low = std::min(stats::quantile_sorted(hcs, 0.025), point);
    est.ci_high = std::max(stats::quantile_sorted(hcs, 0.975), point);
    est.n_boot = n_boot;
    return est;
}

} // namespace hssd
