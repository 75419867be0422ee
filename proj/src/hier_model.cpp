#include "hssd/hier_model.hpp"

#include "hssd/dose_response.hpp"
#include "hssd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace hssd {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.9189385332046727417803297364;
constexpr double kLn10 = 2.302585092994045684017991455;
} // namespace

PriorSpec PriorSpec::from_concentrations(std::span<const double> cs) {
    double cmin = std::numeric_limits<double>::infinity();
    double cmax = 0.0;
    for (double c : cs) {
        if (!(c > 0.0)) continue;
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    if (!(cmax > 0.0) || !std::isfinite(cmin)) {
        throw DomainError("prior construction needs at least one positive concentration");
    }
    if (cmin == cmax) {
        throw DomainError("prior construction needs a non-degenerate concentration range");
    }
    PriorSpec p;
    p.mu_loge_mean = 0.5 * (std::log10(cmin) + std::log10(cmax));
    p.mu_loge_sd = 0.25 * (std::log10(cmax) - std::log10(cmin));
    return p;
}

bool PriorSpec::in_support(const HyperParams& h) const {
    return std::isfinite(h.mu_logb) && std::isfinite(h.mu_loge) && h.sigma_logb > 0.0 &&
           h.sigma_loge > 0.0 && h.sigma_loge < sigma_loge_max && std::fabs(h.rho) < 1.0 &&
           h.sigma_err > 0.0 && h.sigma_err < sigma_err_max;
}

std::size_t HierData::total_observations() const {
    std::size_t n = 0;
    for (const auto& sp : species) n += sp.y.size();
    return n;
}

HierData HierData::from_responses(const std::vector<ResponsePoint>& points,
                                  const std::vector<ControlSummary>& controls) {
    if (points.empty()) throw InsufficientDataError("no response points");
    std::set<std::string> contaminants;
    for (const auto& p : points) contaminants.insert(p.contaminant_id);
    if (contaminants.size() > 1) {
        throw DomainError("hierarchical fit expects a single contaminant, got " +
                          std::to_string(contaminants.size()));
    }
    std::map<std::string, double> d_by_species;
    for (const auto& c : controls) d_by_species[c.species_id] = c.d;

    std::map<std::string, SpeciesObservations> grouped;
    HierData data;
    data.contaminant_id = *contaminants.begin();
    data.c_min = std::numeric_limits<double>::infinity();
    data.c_max = 0.0;
    for (const auto& p : points) {
        auto& sp = grouped[p.species_id];
        if (sp.species_id.empty()) {
            auto it = d_by_species.find(p.species_id);
            if (it == d_by_species.end()) {
                throw NoControlError("no control summary for species '" + p.species_id + "'");
            }
            sp.species_id = p.species_id;
            sp.d = it->second;
        }
        sp.concentration.push_back(p.concentration);
        sp.log_conc.push_back(std::log(p.concentration));
        sp.y.push_back(p.y);
        data.c_min = std::min(data.c_min, p.concentration);
        data.c_max = std::max(data.c_max, p.concentration);
    }
    data.species.reserve(grouped.size());
    for (auto& [id, sp] : grouped) data.species.push_back(std::move(sp));
    return data;
}

double species_sse(const SpeciesObservations& sp, double log_b, double log_e) {
    const double b = std::exp(log_b * kLn10);
    const double ln_e = log_e * kLn10;
    const double ln_d = std::log(sp.d);
    double sse = 0.0;
    for (std::size_t i = 0; i < sp.y.size(); ++i) {
        const double m = ln_d - softplus(b * (sp.log_conc[i] - ln_e));
        const double r = sp.y[i] - m;
        sse += r * r;
    }
    return sse;
}

double species_level_log_density(double log_b, double log_e, const HyperParams& h) {
    const double one_minus_r2 = 1.0 - h.rho * h.rho;
    const double zb = (log_b - h.mu_logb) / h.sigma_logb;
    const double ze = (log_e - h.mu_loge) / h.sigma_loge;
    const double quad = (zb * zb - 2.0 * h.rho * zb * ze + ze * ze) / one_minus_r2;
    return -2.0 * kHalfLog2Pi - std::log(h.sigma_logb) - std::log(h.sigma_loge) -
           0.5 * std::log(one_minus_r2) - 0.5 * quad;
}

double hyper_prior_log_density(const HyperParams& h, const PriorSpec& priors) {
    if (!priors.in_support(h)) return kNegInf;
    double lp = 0.0;
    // mu_logb ~ N(mean, sd)
    {
        const double z = (h.mu_logb - priors.mu_logb_mean) / priors.mu_logb_sd;
        lp += -kHalfLog2Pi - std::log(priors.mu_logb_sd) - 0.5 * z * z;
    }
    // sigma_logb ~ half-normal(scale)
    {
        const double z = h.sigma_logb / priors.sigma_logb_scale;
        lp += std::log(2.0) - kHalfLog2Pi - std::log(priors.sigma_logb_scale) - 0.5 * z * z;
    }
    // mu_loge ~ N(mu_logC, sigma_logC)
    {
        const double z = (h.mu_loge - priors.mu_loge_mean) / priors.mu_loge_sd;
        lp += -kHalfLog2Pi - std::log(priors.mu_loge_sd) - 0.5 * z * z;
    }
    // sigma_loge ~ U(0, max); rho ~ U(-1, 1); sigma_err ~ U(0, max)
    lp += -std::log(priors.sigma_loge_max);
    lp += -std::log(2.0);
    lp += -std::log(priors.sigma_err_max);
    return lp;
}

double log_posterior(const HyperParams& h, const std::vector<SpeciesParams>& species,
                     const HierData& data, const PriorSpec& priors) {
    if (species.size() != data.species.size()) {
        throw DomainError("log_posterior: species parameter count does not match data");
    }
    const double prior = hyper_prior_log_density(h, priors);
    if (prior == kNegInf) return kNegInf;
    double lp = prior;
    const double ln_sigma = std::log(h.sigma_err);
    const double inv_2s2 = 0.5 / (h.sigma_err * h.sigma_err);
    for (std::size_t j = 0; j < species.size(); ++j) {
        const auto& sp = data.species[j];
        const auto& theta_j = species[j];
        if (!std::isfinite(theta_j.log_b) || !std::isfinite(theta_j.log_e)) return kNegInf;
        lp += species_level_log_density(theta_j.log_b, theta_j.log_e, h);
        const double sse = species_sse(sp, theta_j.log_b, theta_j.log_e);
        lp += -static_cast<double>(sp.y.size()) * (kHalfLog2Pi + ln_sigma) - sse * inv_2s2;
    }
    return lp;
}

} // namespace hssd
