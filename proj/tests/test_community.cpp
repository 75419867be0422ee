#include "hssd/community.hpp"

#include "hssd/errors.hpp"
#include "hssd/stats.hpp"

#include <cmath>
#include <doctest.h>
#include <vector>

using namespace hssd;

namespace {

// Single-chain posterior holding the given theta rows; species columns are
// irrelevant for community simulation.
PosteriorSample make_posterior(const std::vector<HyperParams>& thetas) {
    PosteriorSample s;
    for (const char* n : PosteriorSample::hyper_names) s.columns.emplace_back(n);
    DrawMatrix m;
    m.resize(thetas.size(), 6);
    for (std::size_t r = 0; r < thetas.size(); ++r) {
        m.at(r, 0) = thetas[r].mu_logb;
        m.at(r, 1) = thetas[r].sigma_logb;
        m.at(r, 2) = thetas[r].mu_loge;
        m.at(r, 3) = thetas[r].sigma_loge;
        m.at(r, 4) = thetas[r].rho;
        m.at(r, 5) = thetas[r].sigma_err;
    }
    s.chains.push_back(std::move(m));
    for (const char* n : PosteriorSample::hyper_names) s.gelman_rubin_stat[n] = 1.0;
    s.data_c_min = 1.0;
    s.data_c_max = 1000.0;
    return s;
}

HyperParams point_mass(double mu_logb, double sigma_logb, double mu_loge, double sigma_loge,
                       double rho) {
    HyperParams h;
    h.mu_logb = mu_logb;
    h.sigma_logb = sigma_logb;
    h.mu_loge = mu_loge;
    h.sigma_loge = sigma_loge;
    h.rho = rho;
    h.sigma_err = 0.3;
    return h;
}

} // namespace

TEST_CASE("draw_community sample moments and correlation") {
    HyperParams h = point_mass(0.2, 0.5, 2.0, 1.0, 0.0);
    RngStream rng(1, RngDomain::community, 0);
    const int n = 1000000;
    const CommunityDraw cd = draw_community(h, n, rng);
    double sb = 0.0, se = 0.0, sbb = 0.0, see = 0.0, sbe = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lb = std::log10(cd.b[static_cast<std::size_t>(i)]);
        const double le = std::log10(cd.e[static_cast<std::size_t>(i)]);
        sb += lb;
        se += le;
        sbb += lb * lb;
        see += le * le;
        sbe += lb * le;
    }
    const double mb = sb / n, me = se / n;
    const double vb = sbb / n - mb * mb, ve = see / n - me * me;
    const double cov = sbe / n - mb * me;
    CHECK(mb == doctest::Approx(0.2).epsilon(0.01));
    CHECK(me == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::sqrt(vb) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::sqrt(ve) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::fabs(cov / std::sqrt(vb * ve)) <= 0.005);
}

TEST_CASE("draw_community respects correlation") {
    HyperParams h = point_mass(0.0, 0.6, 2.0, 1.2, 0.8);
    RngStream rng(2, RngDomain::community, 0);
    const int n = 200000;
    const CommunityDraw cd = draw_community(h, n, rng);
    double sb = 0.0, se = 0.0, sbb = 0.0, see = 0.0, sbe = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lb = std::log10(cd.b[static_cast<std::size_t>(i)]);
        const double le = std::log10(cd.e[static_cast<std::size_t>(i)]);
        sb += lb;
        se += le;
        sbb += lb * lb;
        see += le * le;
        sbe += lb * le;
    }
    const double mb = sb / n, me = se / n;
    const double corr = (sbe / n - mb * me) /
                        std::sqrt((sbb / n - mb * mb) * (see / n - me * me));
    CHECK(corr == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("draw_community degenerate spread pins every species") {
    HyperParams h = point_mass(0.3, 1e-8, 1.7, 1e-8, 0.0);
    RngStream rng(3, RngDomain::community, 5);
    const CommunityDraw cd = draw_community(h, 50, rng);
    for (std::size_t i = 0; i < cd.b.size(); ++i) {
        CHECK(cd.b[i] == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-6));
        CHECK(cd.e[i] == doctest::Approx(std::pow(10.0, 1.7)).epsilon(1e-6));
    }
}

TEST_CASE("draw_community determinism") {
    HyperParams h = point_mass(0.1, 0.4, 2.2, 0.9, 0.5);
    RngStream r1(9, RngDomain::community, 3);
    RngStream r2(9, RngDomain::community, 3);
    const CommunityDraw a = draw_community(h, 100, r1);
    const CommunityDraw b = draw_community(h, 100, r2);
    CHECK(a.b == b.b);
    CHECK(a.e == b.e);
}

TEST_CASE("r_tot closed forms") {
    CommunityDraw one;
    one.b = {2.3};
    one.e = {40.0};
    CHECK(r_tot(one, 40.0) == doctest::Approx(0.5).epsilon(1e-12)); // C = e
    CHECK(r_tot(one, 1e-12) == doctest::Approx(1.0).epsilon(1e-9)); // control limit

    CommunityDraw two;
    two.b = {1.0, 1.0};
    two.e = {10.0, 1000.0};
    // oracle: direct arithmetic, (1/2 + 100/101) / 2
    CHECK(r_tot(two, 10.0) == doctest::Approx(0.7450495049504951).epsilon(1e-12));
}

TEST_CASE("r_tot is order invariant and decreasing") {
    CommunityDraw cd;
    cd.b = {0.7, 2.2, 1.1};
    cd.e = {5.0, 80.0, 300.0};
    CommunityDraw rev;
    rev.b = {1.1, 2.2, 0.7};
    rev.e = {300.0, 80.0, 5.0};
    double prev = 1.0 + 1e-12;
    for (double c : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0}) {
        const double v = r_tot(cd, c);
        CHECK(v == doctest::Approx(r_tot(rev, c)).epsilon(1e-14));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("global_response solves the analytic single-species cases") {
    // b pinned to 1, e pinned to 200: r_tot(C) = 1/(1 + C/200), so the
    // concentration with a 5% drop is e/19 and GEC50 = e
    const HyperParams h = point_mass(0.0, 1e-9, std::log10(200.0), 1e-9, 0.0);
    const PosteriorSample post = make_posterior({h});
    GlobalResponseOptions opt;
    opt.n_theta = 5;
    opt.n_species = 1;
    opt.seed = 2;
    opt.grid_lo = 0.01;
    opt.grid_hi = 1e5;
    opt.n_grid = 41;

    const GlobalResponseResult g5 = global_response(post, 5.0, opt);
    CHECK(g5.gec.point == doctest::Approx(200.0 / 19.0).epsilon(1e-5));
    const GlobalResponseResult g50 = global_response(post, 50.0, opt);
    CHECK(g50.gec.point == doctest::Approx(200.0).epsilon(1e-5));

    // determinism
    const GlobalResponseResult again = global_response(post, 5.0, opt);
    CHECK(again.gec.point == g5.gec.point);
    CHECK(again.band.median == g5.band.median);
}

TEST_CASE("global_response band is ordered and the grid increases") {
    std::vector<HyperParams> thetas;
    for (int i = 0; i < 40; ++i) {
        thetas.push_back(point_mass(0.2, 0.4, 2.0 + 0.01 * i, 0.9, 0.3));
    }
    const PosteriorSample post = make_posterior(thetas);
    GlobalResponseOptions opt;
    opt.n_theta = 100; // more than stored: with-replacement path
    opt.n_species = 20;
    opt.seed = 4;
    opt.grid_lo = 0.01;
    opt.grid_hi = 1e5;
    opt.n_grid = 31;
    const GlobalResponseResult g = global_response(post, 10.0, opt);
    for (std::size_t i = 0; i < g.band.grid.size(); ++i) {
        CHECK(g.band.lo[i] <= g.band.median[i]);
        CHECK(g.band.median[i] <= g.band.hi[i]);
        if (i > 0) CHECK(g.band.grid[i] > g.band.grid[i - 1]);
    }
    CHECK(g.gec.ci_low <= g.gec.point);
    CHECK(g.gec.point <= g.gec.ci_high);
}

TEST_CASE("hierarchical_ssd matches the lognormal quantile on a point-mass posterior") {
    // EC50 = e is lognormal(mu_loge, sigma_loge); the 5th percentile has the
    // closed form 10^(mu - 1.6448536 sigma)
    const double mu = 2.49, sigma = 1.07;
    const HyperParams h = point_mass(0.16, 0.46, mu, sigma, 0.0);
    const PosteriorSample post = make_posterior({h});
    HierSsdOptions opt;
    opt.n_theta = 3;
    opt.n_species = 100000;
    opt.p = 5.0;
    opt.seed = 6;
    opt.grid_lo = 0.1;
    opt.grid_hi = 1e6;
    opt.n_grid = 41;
    const HierSsdResult res = hierarchical_ssd(post, 50.0, opt);
    const double expected = std::pow(10.0, mu - 1.6448536269514727 * sigma);
    CHECK(res.hc.point == doctest::Approx(expected).epsilon(0.005));

    // fraction-affected band is a cdf: inside [0,1] and non-decreasing
    for (std::size_t i = 0; i < res.band.grid.size(); ++i) {
        CHECK(res.band.lo[i] >= 0.0);
        CHECK(res.band.hi[i] <= 1.0);
        if (i > 0) {
            CHECK(res.band.median[i] >= res.band.median[i - 1]);
            CHECK(res.band.lo[i] >= res.band.lo[i - 1]);
            CHECK(res.band.hi[i] >= res.band.hi[i - 1]);
        }
    }
}

TEST_CASE("hierarchical_ssd with no species spread collapses to the shared EC_x") {
    const HyperParams h = point_mass(std::log10(2.0), 1e-9, std::log10(80.0), 1e-9, 0.0);
    const PosteriorSample post = make_posterior({h});
    HierSsdOptions opt;
    opt.n_theta = 2;
    opt.n_species = 1000;
    opt.seed = 8;
    opt.grid_lo = 0.1;
    opt.grid_hi = 1e4;
    for (double x : {10.0, 50.0, 90.0}) {
        const HierSsdResult res = hierarchical_ssd(post, x, opt);
        const double expected = 80.0 * std::pow(x / (100.0 - x), 1.0 / 2.0);
        CHECK(res.hc.point == doctest::Approx(expected).epsilon(1e-5));
        CHECK(res.hc.ci_low == doctest::Approx(res.hc.ci_high).epsilon(1e-5));
    }
}

TEST_CASE("hc_vs_x is monotone and consistent with hierarchical_ssd") {
    std::vector<HyperParams> thetas;
    for (int i = 0; i < 25; ++i) {
        thetas.push_back(point_mass(0.16 + 0.002 * i, 0.46, 2.49 - 0.003 * i, 1.07, 0.6));
    }
    const PosteriorSample post = make_posterior(thetas);
    HierSsdOptions opt;
    opt.n_theta = 25;
    opt.n_species = 20000;
    opt.p = 5.0;
    opt.seed = 10;
    opt.grid_lo = 0.1;
    opt.grid_hi = 1e6;

    const std::vector<double> x_grid = {10.0, 25.0, 50.0, 75.0, 90.0};
    const CurveBand band = hc_vs_x(post, x_grid, opt);
    for (std::size_t i = 1; i < band.grid.size(); ++i) {
        CHECK(band.median[i] >= band.median[i - 1]);
        CHECK(band.lo[i] >= band.lo[i - 1]);
        CHECK(band.hi[i] >= band.hi[i - 1]);
    }

    const HierSsdResult at50 = hierarchical_ssd(post, 50.0, opt);
    CHECK(band.median[2] == at50.hc.point); // exact: same draws, same seed
    CHECK(band.lo[2] == at50.hc.ci_low);
    CHECK(band.hi[2] == at50.hc.ci_high);
}

TEST_CASE("concentration scale equivariance of GEC and HC") {
    const double k = 25.0;
    const HyperParams h1 = point_mass(0.1, 0.3, 1.8, 0.7, 0.2);
    HyperParams h2 = h1;
    h2.mu_loge += std::log10(k);
    const PosteriorSample p1 = make_posterior({h1});
    const PosteriorSample p2 = make_posterior({h2});

    GlobalResponseOptions gopt;
    gopt.n_theta = 50;
    gopt.n_species = 15;
    gopt.seed = 11;
    gopt.grid_lo = 1e-3;
    gopt.grid_hi = 1e6;
    const double gec1 = global_response(p1, 5.0, gopt).gec.point;
    GlobalResponseOptions gopt2 = gopt;
    gopt2.grid_lo *= k;
    gopt2.grid_hi *= k;
    const double gec2 = global_response(p2, 5.0, gopt2).gec.point;
    CHECK(gec2 == doctest::Approx(gec1 * k).epsilon(1e-5));

    HierSsdOptions sopt;
    sopt.n_theta = 10;
    sopt.n_species = 20000;
    sopt.seed = 12;
    sopt.grid_lo = 1e-3;
    sopt.grid_hi = 1e6;
    const double hc1 = hierarchical_ssd(p1, 50.0, sopt).hc.point;
    HierSsdOptions sopt2 = sopt;
    sopt2.grid_lo *= k;
    sopt2.grid_hi *= k;
    const double hc2 = hierarchical_ssd(p2, 50.0, sopt2).hc.point;
    CHECK(hc2 == doctest::Approx(hc1 * k).epsilon(1e-6));
}

TEST_CASE("doubling the large-community size moves HC by less than 0.5%") {
    const HyperParams h = point_mass(0.16, 0.46, 2.49, 1.07, 0.83);
    const PosteriorSample post = make_posterior({h});
    HierSsdOptions opt;
    opt.n_theta = 4;
    opt.n_species = 100000;
    opt.seed = 13;
    opt.grid_lo = 0.1;
    opt.grid_hi = 1e6;
    const double a = hierarchical_ssd(post, 50.0, opt).hc.point;
    opt.n_species = 200000;
    const double b = hierarchical_ssd(post, 50.0, opt).hc.point;
    CHECK(std::fabs(a - b) / a < 0.005);
}

TEST_CASE("simulation is schedule independent") {
    std::vector<HyperParams> thetas;
    for (int i = 0; i < 30; ++i) {
        thetas.push_back(point_mass(0.2, 0.4, 2.0 + 0.005 * i, 0.9, 0.4));
    }
    const PosteriorSample post = make_posterior(thetas);
    GlobalResponseOptions opt;
    opt.n_theta = 30;
    opt.n_species = 10;
    opt.seed = 14;
    opt.grid_lo = 0.01;
    opt.grid_hi = 1e5;
    opt.threads = 1;
    const GlobalResponseResult a = global_response(post, 5.0, opt);
    opt.threads = 3;
    const GlobalResponseResult b = global_response(post, 5.0, opt);
    CHECK(a.gec.point == b.gec.point);
    CHECK(a.band.lo == b.band.lo);
    CHECK(a.band.hi == b.band.hi);
}
