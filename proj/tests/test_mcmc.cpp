#include "hssd/mcmc.hpp"

#include "hssd/errors.hpp"
#include "hssd/rng.hpp"
#include "hssd/stats.hpp"
#include "hssd/synthesize.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <doctest.h>
#include <vector>

using namespace hssd;

namespace {

HierData data_from_synth(const SynthResult& synth) {
    const auto pts = make_responses(synth.dataset);
    std::vector<ControlSummary> controls;
    for (const auto& sid : synth.dataset.species_ids()) {
        controls.push_back(estimate_control(synth.dataset, sid));
    }
    return HierData::from_responses(pts, controls);
}

struct Benchmark {
    HierData data;
    PriorSpec priors;
    HyperParams truth;
};

Benchmark make_benchmark(double rho, std::uint64_t seed, int n_species = 6) {
    HyperParams theta;
    theta.mu_logb = 0.16;
    theta.sigma_logb = 0.46;
    theta.mu_loge = 2.49;
    theta.sigma_loge = 1.07;
    theta.rho = rho;
    theta.sigma_err = 0.3;
    SynthDesign design;
    design.concentrations = hssd_test::geometric_concentrations(0.1, 1e5, 8);
    design.replicates = 2;
    design.n_species = n_species;
    const SynthResult synth = synthesize_dataset(theta, design, seed);
    Benchmark b{data_from_synth(synth),
                PriorSpec::from_concentrations(design.concentrations), theta};
    return b;
}

const PosteriorSample& benchmark_sample() {
    static const PosteriorSample sample = [] {
        const Benchmark b = make_benchmark(0.83, 42);
        McmcConfig cfg;
        cfg.n_iter = 8000;
        cfg.thin = 5;
        cfg.n_chains = 3;
        cfg.seed = 7;
        return run_mcmc(b.data, b.priors, cfg);
    }();
    return sample;
}

} // namespace

TEST_CASE("gelman_rubin agrees with a direct B/W evaluation on a tiny case") {
    // two chains of 10 hand-picked values; expected value computed from the
    // B/W formula with plain arithmetic below
    const std::vector<double> c1 = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::vector<double> c2 = {11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    const double w = (stats::variance(c1, 1) + stats::variance(c2, 1)) / 2.0;
    const double mean1 = stats::mean(c1), mean2 = stats::mean(c2);
    const double grand = 0.5 * (mean1 + mean2);
    const double b_over_n =
        ((mean1 - grand) * (mean1 - grand) + (mean2 - grand) * (mean2 - grand)) / (2.0 - 1.0);
    const double sigma2 = 9.0 / 10.0 * w + b_over_n;
    const double expected = std::sqrt((sigma2 + b_over_n / 2.0) / w);
    CHECK(gelman_rubin({c1, c2}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gelman_rubin near 1 for iid chains, large for separated chains") {
    std::vector<std::vector<double>> same, apart;
    for (int c = 0; c < 4; ++c) {
        RngStream rng(100 + c);
        std::vector<double> a(10000), b(10000);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal() + (c < 2 ? 0.0 : 10.0);
        }
        same.push_back(std::move(a));
        apart.push_back(std::move(b));
    }
    const double r_same = gelman_rubin(same);
    CHECK(r_same >= 0.99);
    CHECK(r_same <= 1.02);
    CHECK(gelman_rubin(apart) > 2.0);
}

TEST_CASE("gelman_rubin error paths") {
    const std::vector<double> constant(20, 3.5);
    CHECK_THROWS_AS(gelman_rubin({constant, constant}), UndefinedDiagnosticError);
    CHECK_THROWS_AS(gelman_rubin({constant}), DomainError);
    CHECK_THROWS_AS(gelman_rubin({{1, 2, 3}, {1, 2, 3}}), DomainError);
}

TEST_CASE("run_mcmc rejects bad configurations and data") {
    const Benchmark b = make_benchmark(0.0, 5, 3);
    McmcConfig cfg;
    cfg.n_iter = 1000;
    cfg.thin = 5;

    McmcConfig one_chain = cfg;
    one_chain.n_chains = 1;
    CHECK_THROWS_AS(run_mcmc(b.data, b.priors, one_chain), DomainError);

    McmcConfig bad_thin = cfg;
    bad_thin.thin = 2000;
    CHECK_THROWS_AS(run_mcmc(b.data, b.priors, bad_thin), DomainError);

    HierData single = b.data;
    single.species.resize(1);
    CHECK_THROWS_AS(run_mcmc(single, b.priors, cfg), InsufficientDataError);
}

TEST_CASE("run_mcmc draw bookkeeping") {
    const Benchmark b = make_benchmark(0.5, 11, 4);
    McmcConfig cfg;
    cfg.n_iter = 1000;
    cfg.thin = 7;
    cfg.n_chains = 2;
    cfg.seed = 3;
    const PosteriorSample s = run_mcmc(b.data, b.priors, cfg);
    const std::size_t expected = static_cast<std::size_t>((1000 - 500) / 7);
    REQUIRE(s.chains.size() == 2);
    CHECK(s.n_kept_per_chain() == expected);
    CHECK(s.iterations.size() == expected);
    CHECK(s.iterations.front() == 500 + 7);
    CHECK(s.iterations.back() <= 1000);
    CHECK(s.columns.size() == 6 + 2 * b.data.species.size());
    // every stored draw satisfies the hyperparameter invariants
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t r = 0; r < s.n_kept_per_chain(); ++r) {
            const HyperParams h = s.hyper(c, r);
            CHECK(h.sigma_logb > 0.0);
            CHECK(h.sigma_loge > 0.0);
            CHECK(h.sigma_loge < 10.0);
            CHECK(std::fabs(h.rho) < 1.0);
            CHECK(h.sigma_err > 0.0);
            CHECK(h.sigma_err < 2.0);
        }
    }
}

TEST_CASE("run_mcmc is deterministic and schedule independent") {
    const Benchmark b = make_benchmark(0.83, 8, 4);
    McmcConfig cfg;
    cfg.n_iter = 2000;
    cfg.thin = 4;
    cfg.n_chains = 2;
    cfg.seed = 99;
    const PosteriorSample s1 = run_mcmc(b.data, b.priors, cfg);
    const PosteriorSample s2 = run_mcmc(b.data, b.priors, cfg);
    McmcConfig parallel = cfg;
    parallel.threads = 2;
    const PosteriorSample s3 = run_mcmc(b.data, b.priors, parallel);
    for (std::size_t c = 0; c < 2; ++c) {
        REQUIRE(s1.chains[c].data.size() == s2.chains[c].data.size());
        CHECK(s1.chains[c].data == s2.chains[c].data); // bit identical
        CHECK(s1.chains[c].data == s3.chains[c].data);
    }
}

TEST_CASE("benchmark posterior concentrates near the generating values") {
    const PosteriorSample& s = benchmark_sample();
    const Benchmark b = make_benchmark(0.83, 42);

    auto median_of = [&](std::size_t col) { return stats::quantile(s.pooled_column(col), 0.5); };
    CHECK(std::fabs(median_of(0) - b.truth.mu_logb) < 0.6);
    CHECK(std::fabs(median_of(2) - b.truth.mu_loge) < 1.2);
    CHECK(std::fabs(median_of(5) - b.truth.sigma_err) < 0.15);

    // acceptance rates of every adapted block settle in the target band
    for (const auto& chain_stats : s.block_stats) {
        for (const auto& blk : chain_stats) {
            CHECK(blk.acceptance_rate >= 0.15);
            CHECK(blk.acceptance_rate <= 0.60);
        }
    }
}

TEST_CASE("rho = 0 data keeps the posterior correlation near zero") {
    const Benchmark b = make_benchmark(0.0, 31, 8);
    McmcConfig cfg;
    cfg.n_iter = 6000;
    cfg.thin = 5;
    cfg.n_chains = 2;
    cfg.seed = 17;
    const PosteriorSample s = run_mcmc(b.data, b.priors, cfg);
    const double rho_median = stats::quantile(s.pooled_column(4), 0.5);
    CHECK(rho_median > -0.5);
    CHECK(rho_median < 0.5);
}

TEST_CASE("translation equivariance on matched seeds") {
    const double shift = 2.0; // concentrations scaled by 10^2
    HyperParams theta;
    theta.mu_logb = 0.2;
    theta.sigma_logb = 0.4;
    theta.mu_loge = 2.0;
    theta.sigma_loge = 0.8;
    theta.rho = 0.4;
    theta.sigma_err = 0.3;
    SynthDesign design;
    design.concentrations = hssd_test::geometric_concentrations(0.5, 5e4, 7);
    design.n_species = 5;
    const SynthResult base = synthesize_dataset(theta, design, 4);

    // same y values, concentrations (and the priors derived from them)
    // shifted by a factor of 10^shift
    SynthResult moved = base;
    for (auto& o : moved.dataset.observations) o.concentration *= std::pow(10.0, shift);

    McmcConfig cfg;
    cfg.n_iter = 6000;
    cfg.thin = 5;
    cfg.n_chains = 2;
    cfg.seed = 12;

    const HierData d1 = data_from_synth(base);
    const HierData d2 = data_from_synth(moved);
    const PosteriorSample s1 = run_mcmc(d1, PriorSpec::from_concentrations({d1.c_min, d1.c_max}), cfg);
    const PosteriorSample s2 = run_mcmc(d2, PriorSpec::from_concentrations({d2.c_min, d2.c_max}), cfg);

    for (double q : {0.25, 0.5, 0.75}) {
        CHECK(stats::quantile(s2.pooled_column(2), q) -
                  stats::quantile(s1.pooled_column(2), q) ==
              doctest::Approx(shift).epsilon(0.08));
        for (std::size_t col : {0u, 1u, 3u, 4u}) {
            CHECK(stats::quantile(s2.pooled_column(col), q) ==
                  doctest::Approx(stats::quantile(s1.pooled_column(col), q)).epsilon(0.1));
        }
    }
}

TEST_CASE("prior_posterior_report flags an uninformed posterior") {
    // posterior == prior: fill a sample with direct prior draws
    PriorSpec priors;
    priors.mu_loge_mean = 2.0;
    priors.mu_loge_sd = 1.5;
    PosteriorSample s;
    s.priors = priors;
    for (const char* n : PosteriorSample::hyper_names) s.columns.emplace_back(n);
    RngStream rng(5);
    DrawMatrix m;
    m.resize(4000, 6);
    for (std::size_t r = 0; r < m.rows; ++r) {
        m.at(r, 0) = -6.0 + 6.0 * rng.normal();
        m.at(r, 1) = std::fabs(10.0 * rng.normal());
        m.at(r, 2) = 2.0 + 1.5 * rng.normal();
        m.at(r, 3) = rng.uniform(0.0, 10.0);
        m.at(r, 4) = rng.uniform(-1.0, 1.0);
        m.at(r, 5) = rng.uniform(0.0, 2.0);
    }
    s.chains.push_back(std::move(m));
    const auto rows = prior_posterior_report(s, priors);
    REQUIRE(rows.size() == 6);
    for (const auto& row : rows) {
        CHECK(row.ratio == doctest::Approx(1.0).epsilon(0.08));
        CHECK(row.data_weak);
        CHECK(row.natural_constraint == (row.name == "rho"));
    }
}

TEST_CASE("prior_posterior_report shows learning on the benchmark") {
    const PosteriorSample& s = benchmark_sample();
    const auto rows = prior_posterior_report(s, s.priors);
    for (const auto& row : rows) {
        if (row.name == "mu_loge") {
            CHECK(row.ratio < 0.5);
            CHECK_FALSE(row.data_weak);
        }
        if (row.name == "rho") CHECK(row.natural_constraint);
    }
}
