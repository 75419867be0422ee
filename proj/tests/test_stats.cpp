#include "hssd/rng.hpp"
#include "hssd/stats.hpp"

#include <cmath>
#include <doctest.h>
#include <vector>

using namespace hssd;

TEST_CASE("mean and variance forms") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    CHECK(stats::mean(x) == doctest::Approx(2.5));
    CHECK(stats::variance(x, 1) == doctest::Approx(5.0 / 3.0));
    CHECK(stats::variance(x, 0) == doctest::Approx(1.25));
}

TEST_CASE("quantile linear interpolation") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(stats::quantile(x, 0.0) == doctest::Approx(1.0));
    CHECK(stats::quantile(x, 1.0) == doctest::Approx(5.0));
    CHECK(stats::quantile(x, 0.5) == doctest::Approx(3.0));
    CHECK(stats::quantile(x, 0.25) == doctest::Approx(2.0));
    CHECK(stats::quantile(x, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("quantile_inplace matches full sort") {
    RngStream rng(99);
    std::vector<double> x(1001);
    for (auto& v : x) v = rng.normal();
    for (double q : {0.05, 0.025, 0.5, 0.975}) {
        std::vector<double> a = x;
        std::vector<double> b = x;
        CHECK(stats::quantile_inplace(a, q) == doctest::Approx(stats::quantile(b, q)).epsilon(1e-15));
    }
}

TEST_CASE("normal quantile against reference values") {
    // reference values from a high-precision erfinv evaluation
    CHECK(stats::normal_quantile(0.05) ==
          doctest::Approx(-1.6448536269514727).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.95) == doctest::Approx(1.6448536269514727).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.025) == doctest::Approx(-1.9599639845400542).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.9599639845400542).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(stats::normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-12));
    CHECK(stats::normal_quantile(1e-9) == doctest::Approx(-5.9978070150076869).epsilon(1e-9));
    CHECK(stats::normal_quantile(0.9999999) == doctest::Approx(5.1993375821928169).epsilon(1e-9));
}

TEST_CASE("normal quantile and cdf are inverse") {
    for (double p : {0.001, 0.05, 0.3, 0.5, 0.7, 0.99, 0.99999}) {
        CHECK(stats::normal_cdf(stats::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("rng streams are deterministic and independent") {
    RngStream a(42, RngDomain::chain, 0);
    RngStream b(42, RngDomain::chain, 0);
    RngStream c(42, RngDomain::chain, 1);
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform();
        all_equal = all_equal && va == b.uniform();
        any_differ = any_differ || va != c.uniform();
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("rng normal moments") {
    RngStream rng(7);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("rng uniform_int covers range") {
    RngStream rng(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) ++counts[rng.uniform_int(7)];
    for (int k = 0; k < 7; ++k) CHECK(counts[k] > 800);
}
