#include "hssd/community.hpp"

#include "hssd/errors.hpp"
#include "hssd/parallel.hpp"
#include "hssd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hssd {

namespace {

constexpr double kLn10 = 2.302585092994045684017991455;

// Deterministic selection of posterior rows: an evenly spaced pass when
// enough draws exist, with-replacement resampling otherwise.
std::vector<std::pair<std::size_t, std::size_t>> select_thetas(const PosteriorSample& posterior,
                                                               int n_theta, std::uint64_t seed) {
    const std::size_t total = posterior.total_draws();
    if (total == 0) throw DomainError("posterior sample is empty");
    std::vector<std::pair<std::size_t, std::size_t>> picks;
    picks.reserve(static_cast<std::size_t>(n_theta));
    auto locate = [&](std::size_t flat) -> std::pair<std::size_t, std::size_t> {
        std::size_t c = 0;
        while (flat >= posterior.chains[c].rows) {
            flat -= posterior.chains[c].rows;
            ++c;
        }
        return {c, flat};
    };
    if (total >= static_cast<std::size_t>(n_theta)) {
        for (int k = 0; k < n_theta; ++k) {
            const std::size_t flat =
                static_cast<std::size_t>(static_cast<double>(k) * static_cast<double>(total) /
                                         static_cast<double>(n_theta));
            picks.push_back(locate(flat));
        }
    } else {
        RngStream rng(seed, RngDomain::theta, 0);
        for (int k = 0; k < n_theta; ++k) picks.push_back(locate(rng.uniform_int(total)));
    }
    return picks;
}

void band_from_samples(std::vector<std::vector<double>>& per_point, CurveBand& band) {
    const std::size_t n = per_point.size();
    band.lo.resize(n);
    band.median.resize(n);
    band.hi.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
        std::sort(per_point[g].begin(), per_point[g].end());
        band.lo[g] = stats::quantile_sorted(per_point[g], 0.025);
        band.median[g] = stats::quantile_sorted(per_point[g], 0.50);
        band.hi[g] = stats::quantile_sorted(per_point[g], 0.975);
    }
}

void check_grid(double lo, double hi) {
    if (!(lo > 0.0) || !(hi > lo)) {
        throw DomainError("concentration grid bounds must satisfy 0 < lo < hi");
    }
}

} // namespace

std::vector<double> log_grid(double lo, double hi, int n) {
    check_grid(lo, hi);
    if (n < 2) throw DomainError("grid needs >= 2 points");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double llo = std::log10(lo);
    const double step = (std::log10(hi) - llo) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = std::pow(10.0, llo + step * i);
    }
    return g;
}

CommunityDraw draw_community(const HyperParams& theta, int n_species, RngStream& rng) {
    if (n_species < 1) throw DomainError("draw_community: n_species must be >= 1");
    CommunityDraw cd;
    cd.theta = theta;
    cd.b.resize(static_cast<std::size_t>(n_species));
    cd.e.resize(static_cast<std::size_t>(n_species));
    // Cholesky factor of the 2x2 covariance on (log10 b, log10 e).
    const double rho_c = std::sqrt(1.0 - theta.rho * theta.rho);
    for (int i = 0; i < n_species; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double log_b = theta.mu_logb + theta.sigma_logb * z1;
        const double log_e = theta.mu_loge + theta.sigma_loge * (theta.rho * z1 + rho_c * z2);
        cd.b[static_cast<std::size_t>(i)] = std::pow(10.0, log_b);
        cd.e[static_cast<std::size_t>(i)] = std::pow(10.0, log_e);
    }
    return cd;
}

double r_tot(const CommunityDraw& community, double concentration) {
    if (community.b.empty()) throw DomainError("r_tot: empty community");
    if (!(concentration > 0.0)) return 1.0;
    const double ln_c = std::log(concentration);
    double sum = 0.0;
    for (std::size_t i = 0; i < community.b.size(); ++i) {
        const double t = community.b[i] * (ln_c - std::log(community.e[i]));
        sum += 1.0 / (1.0 + std::exp(t));
    }
    return sum / static_cast<double>(community.b.size());
}

GlobalResponseResult global_response(const PosteriorSample& posterior, double x,
                                     const GlobalResponseOptions& opt) {
    if (!(x > 0.0 && x < 100.0)) throw DomainError("global_response: x must lie in (0, 100)");
    check_grid(opt.grid_lo, opt.grid_hi);
    const auto picks = select_thetas(posterior, opt.n_theta, opt.seed);
    const std::vector<double> grid = log_grid(opt.grid_lo, opt.grid_hi, opt.n_grid);
    const double target = 1.0 - x / 100.0;

    std::vector<double> gecs(picks.size());
    std::vector<std::vector<double>> responses(grid.size(),
                                               std::vector<double>(picks.size(), 0.0));
    std::vector<std::string> failures(picks.size());

    parallel_for(static_cast<long>(picks.size()), opt.threads, [&](long k) {
        const auto [chain, row] = picks[static_cast<std::size_t>(k)];
        RngStream rng(opt.seed, RngDomain::community, static_cast<std::uint64_t>(k));
        const CommunityDraw cd = draw_community(posterior.hyper(chain, row), opt.n_species, rng);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            responses[g][static_cast<std::size_t>(k)] = r_tot(cd, grid[g]);
        }
        // Solve r_tot(C) = target by bisection on log10 C. r_tot is
        // strictly decreasing, so once bracketed the root is unique.
        // Each side may expand by up to 20 decades before giving up.
        double lo = std::log10(*std::min_element(cd.e.begin(), cd.e.end())) - 3.0;
        double hi = std::log10(*std::max_element(cd.e.begin(), cd.e.end())) + 3.0;
        for (int exp_lo = 0; r_tot(cd, std::pow(10.0, lo)) < target && exp_lo < 8; ++exp_lo) {
            lo -= 2.5;
        }
        for (int exp_hi = 0; r_tot(cd, std::pow(10.0, hi)) > target && exp_hi < 8; ++exp_hi) {
            hi += 2.5;
        }
        if (r_tot(cd, std::pow(10.0, lo)) < target || r_tot(cd, std::pow(10.0, hi)) > target) {
            failures[static_cast<std::size_t>(k)] =
                "global_response: root not bracketed for theta draw " + std::to_string(k);
            return;
        }
        while (hi - lo > 4.3e-7) { // log10(1 + 1e-6)
            const double mid = 0.5 * (lo + hi);
            if (r_tot(cd, std::pow(10.0, mid)) > target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        gecs[static_cast<std::size_t>(k)] = std::pow(10.0, 0.5 * (lo + hi));
    });
    for (const auto& f : failures) {
        if (!f.empty()) throw NumericalError(f);
    }

    GlobalResponseResult res;
    res.band.kind = CurveBand::Kind::global_response;
    res.band.grid = grid;
    band_from_samples(responses, res.band);

    std::sort(gecs.begin(), gecs.end());
    res.gec.x = x;
    res.gec.point = stats::quantile_sorted(gecs, 0.50);
    res.gec.ci_low = stats::quantile_sorted(gecs, 0.025);
    res.gec.ci_high = stats::quantile_sorted(gecs, 0.975);
    return res;
}

namespace {

// Shared core of hierarchical_ssd and hc_vs_x: per theta draw, simulate one
// large community and compute its HC_p on every requested x; optionally
// accumulate the fraction-affected band for the first x.
struct SsdSimulation {
    std::vector<std::vector<double>> hc_per_x; // [x][theta]
    std::vector<std::vector<double>> fractions; // [grid][theta], first x only
};

SsdSimulation simulate_ssd(const PosteriorSample& posterior, const std::vector<double>& x_list,
                           const HierSsdOptions& opt, const std::vector<double>* grid) {
    for (double x : x_list) {
        if (!(x > 0.0 && x < 100.0)) throw DomainError("effect level x must lie in (0, 100)");
    }
    if (!(opt.p > 0.0 && opt.p < 100.0)) throw DomainError("HC percentile must lie in (0, 100)");
    if (opt.n_species < 2) throw DomainError("hierarchical SSD needs >= 2 species per community");
    const auto picks = select_thetas(posterior, opt.n_theta, opt.seed);

    SsdSimulation sim;
    sim.hc_per_x.assign(x_list.size(), std::vector<double>(picks.size(), 0.0));
    if (grid) sim.fractions.assign(grid->size(), std::vector<double>(picks.size(), 0.0));

    std::vector<double> q_factors(x_list.size());
    for (std::size_t i = 0; i < x_list.size(); ++i) {
        q_factors[i] = std::log10(x_list[i] / (100.0 - x_list[i]));
    }

    parallel_for(static_cast<long>(picks.size()), opt.threads, [&](long k) {
        const auto [chain, row] = picks[static_cast<std::size_t>(k)];
        const HyperParams theta = posterior.hyper(chain, row);
        RngStream rng(opt.seed, RngDomain::community, static_cast<std::uint64_t>(k));
        const std::size_t n = static_cast<std::size_t>(opt.n_species);
        // species in (log10 e, 1/b) form; EC_x then costs one FMA per species
        std::vector<double> log_e(n), inv_b(n);
        const double rho_c = std::sqrt(1.0 - theta.rho * theta.rho);
        for (std::size_t i = 0; i < n; ++i) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double log_b = theta.mu_logb + theta.sigma_logb * z1;
            log_e[i] = theta.mu_loge + theta.sigma_loge * (theta.rho * z1 + rho_c * z2);
            inv_b[i] = std::exp(-log_b * kLn10);
        }
        std::vector<double> log_ecx(n);
        for (std::size_t xi = 0; xi < x_list.size(); ++xi) {
            for (std::size_t i = 0; i < n; ++i) {
                log_ecx[i] = log_e[i] + inv_b[i] * q_factors[xi];
            }
            if (xi == 0 && grid) {
                std::sort(log_ecx.begin(), log_ecx.end());
                sim.hc_per_x[xi][static_cast<std::size_t>(k)] =
                    std::pow(10.0, stats::quantile_sorted(log_ecx, opt.p / 100.0));
                for (std::size_t g = 0; g < grid->size(); ++g) {
                    const double lc = std::log10((*grid)[g]);
                    const auto affected = std::upper_bound(log_ecx.begin(), log_ecx.end(), lc) -
                                          log_ecx.begin();
                    sim.fractions[g][static_cast<std::size_t>(k)] =
                        static_cast<double>(affected) / static_cast<double>(n);
                }
            } else {
                sim.hc_per_x[xi][static_cast<std::size_t>(k)] =
                    std::pow(10.0, stats::quantile_inplace(log_ecx, opt.p / 100.0));
            }
        }
    });
    return sim;
}

} // namespace

HierSsdResult hierarchical_ssd(const PosteriorSample& posterior, double x,
                               const HierSsdOptions& opt) {
    check_grid(opt.grid_lo, opt.grid_hi);
    const std::vector<double> grid = log_grid(opt.grid_lo, opt.grid_hi, opt.n_grid);
    SsdSimulation sim = simulate_ssd(posterior, {x}, opt, &grid);

    HierSsdResult res;
    res.band.kind = CurveBand::Kind::ssd_fraction_affected;
    res.band.grid = grid;
    band_from_samples(sim.fractions, res.band);

    auto& hcs = sim.hc_per_x.front();
    std::sort(hcs.begin(), hcs.end());
    res.hc.p = opt.p;
    res.hc.point = stats::quantile_sorted(hcs, 0.50);
    res.hc.ci_low = stats::quantile_sorted(hcs, 0.025);
    res.hc.ci_high = stats::quantile_sorted(hcs, 0.975);
    res.hc.n_boot = opt.n_theta;
    return res;
}

CurveBand hc_vs_x(const PosteriorSample& posterior, const std::vector<double>& x_grid,
                  const HierSsdOptions& opt) {
    if (x_grid.empty()) throw DomainError("hc_vs_x: empty x grid");
    if (!std::is_sorted(x_grid.begin(), x_grid.end())) {
        throw DomainError("hc_vs_x: x grid must be increasing");
    }
    SsdSimulation sim = simulate_ssd(posterior, x_grid, opt, nullptr);
    CurveBand band;
    band.kind = CurveBand::Kind::hc5_vs_x;
    band.grid = x_grid;
    band_from_samples(sim.hc_per_x, band);
    return band;
}

} // namespace hssd
