#include "hssd/stats.hpp"

#include "hssd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hssd::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw DomainError("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x, int ddof) {
    const auto n = static_cast<long>(x.size());
    if (n - ddof <= 0) throw DomainError("variance needs more than ddof observations");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(n - ddof);
}

double sd(std::span<const double> x, int ddof) { return std::sqrt(variance(x, ddof)); }

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DomainError("quantile of empty sample");
    if (q < 0.0 || q > 1.0) throw DomainError("quantile level outside [0,1]");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> x, double q) {
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, q);
}

double quantile_inplace(std::vector<double>& x, double q) {
    if (x.empty()) throw DomainError("quantile of empty sample");
    if (q < 0.0 || q > 1.0) throw DomainError("quantile level outside [0,1]");
    const double h = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lo), x.end());
    const double vlo = x[lo];
    if (lo + 1 >= x.size()) return vlo;
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return vlo;
    // next order statistic = min of the remaining upper part
    const double vhi = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(lo) + 1, x.end());
    return vlo + frac * (vhi - vlo);
}

// AS 241 algorithm PPND16 (Wichura, 1988).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_logpdf(double x, double mu, double sd) {
    static const double half_log_2pi = 0.9189385332046727417803297364;
    const double z = (x - mu) / sd;
    return -half_log_2pi - std::log(sd) - 0.5 * z * z;
}

} // namespace hssd::stats
