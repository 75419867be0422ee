#include "hssd/dose_response.hpp"

#include "hssd/errors.hpp"
#include "hssd/rng.hpp"
#include "hssd/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace hssd {

double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

double loglogistic(double concentration, double b, double e, double d) {
    if (!(b > 0.0) || !(e > 0.0) || !(d > 0.0)) {
        throw DomainError("loglogistic requires b, e, d > 0");
    }
    if (concentration == 0.0) return d;
    return d * std::exp(-softplus(b * std::log(concentration / e)));
}

double ec_x(double b, double e, double x) {
    if (!(x > 0.0 && x < 100.0)) throw DomainError("effect level x must lie in (0, 100)");
    if (!(b > 0.0) || !(e > 0.0)) throw DomainError("ec_x requires b, e > 0");
    return e * std::pow(x / (100.0 - x), 1.0 / b);
}

double ec_x(const CurveFit& fit, double x) { return ec_x(fit.b, fit.e, x); }

namespace {

// Precomputed fit inputs: natural-log concentrations, log responses, ln d.
struct SseData {
    std::vector<double> log_c;
    std::vector<double> y;
    double log_d = 0.0;

    // SSE of eq-model residuals at (ln b, ln e).
    double operator()(double lb, double le) const {
        const double b = std::exp(lb);
        double sse = 0.0;
        for (std::size_t i = 0; i < log_c.size(); ++i) {
            const double m = log_d - softplus(b * (log_c[i] - le));
            const double r = y[i] - m;
            sse += r * r;
        }
        return sse;
    }
};

struct OptResult {
    double lb = 0.0;
    double le = 0.0;
    double sse = std::numeric_limits<double>::infinity();
    bool tol_met = false;
};

constexpr double kSseRelTol = 1e-9;
constexpr double kSseAbsFloor = 1e-15;

// Standard 2-d Nelder-Mead simplex with reflection/expansion/contraction/
// shrink. Terminates when the SSE spread across the simplex drops below the
// relative tolerance or the simplex collapses.
OptResult nelder_mead(const SseData& f, double lb0, double le0, double step, int max_iter) {
    struct Vertex {
        double x[2];
        double fv;
    };
    std::array<Vertex, 3> s{};
    s[0] = {{lb0, le0}, f(lb0, le0)};
    s[1] = {{lb0 + step, le0}, f(lb0 + step, le0)};
    s[2] = {{lb0, le0 + step}, f(lb0, le0 + step)};

    auto order = [&s]() {
        std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fv < b.fv; });
    };
    order();

    bool tol_met = false;
    for (int it = 0; it < max_iter; ++it) {
        if (s[2].fv - s[0].fv <= kSseRelTol * std::fabs(s[0].fv) + kSseAbsFloor) {
            tol_met = true;
            break;
        }
        const double span = std::max(std::fabs(s[2].x[0] - s[0].x[0]) + std::fabs(s[1].x[0] - s[0].x[0]),
                                     std::fabs(s[2].x[1] - s[0].x[1]) + std::fabs(s[1].x[1] - s[0].x[1]));
        if (span < 1e-12) {
            tol_met = true;
            break;
        }
        const double cx = 0.5 * (s[0].x[0] + s[1].x[0]);
        const double cy = 0.5 * (s[0].x[1] + s[1].x[1]);
        const double rx = cx + (cx - s[2].x[0]);
        const double ry = cy + (cy - s[2].x[1]);
        const double fr = f(rx, ry);
        if (fr < s[0].fv) {
            const double ex = cx + 2.0 * (cx - s[2].x[0]);
            const double ey = cy + 2.0 * (cy - s[2].x[1]);
            const double fe = f(ex, ey);
            if (fe < fr) {
                s[2] = {{ex, ey}, fe};
            } else {
                s[2] = {{rx, ry}, fr};
            }
        } else if (fr < s[1].fv) {
            s[2] = {{rx, ry}, fr};
        } else {
            const bool outside = fr < s[2].fv;
            const double px = outside ? cx + 0.5 * (rx - cx) : cx + 0.5 * (s[2].x[0] - cx);
            const double py = outside ? cy + 0.5 * (ry - cy) : cy + 0.5 * (s[2].x[1] - cy);
            const double fp = f(px, py);
            if (fp < (outside ? fr : s[2].fv)) {
                s[2] = {{px, py}, fp};
            } else {
                for (int v = 1; v < 3; ++v) {
                    s[v].x[0] = s[0].x[0] + 0.5 * (s[v].x[0] - s[0].x[0]);
                    s[v].x[1] = s[0].x[1] + 0.5 * (s[v].x[1] - s[0].x[1]);
                    s[v].fv = f(s[v].x[0], s[v].x[1]);
                }
            }
        }
        order();
    }
    return {s[0].x[0], s[0].x[1], s[0].fv, tol_met};
}

// Golden-section line search on one coordinate; returns refined value.
double golden_refine(const std::function<double(double)>& g, double x0, double h) {
    const double gr = 0.6180339887498949;
    double a = x0 - h, b = x0 + h;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = g(c), fd = g(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = g(d);
        }
    }
    const double xm = 0.5 * (a + b);
    return g(xm) <= g(x0) ? xm : x0;
}

OptResult refine_coordinates(const SseData& f, OptResult r) {
    for (int pass = 0; pass < 2; ++pass) {
        const double le = r.le;
        r.lb = golden_refine([&](double lb) { return f(lb, le); }, r.lb, 1e-3);
        const double lb = r.lb;
        r.le = golden_refine([&](double lev) { return f(lb, lev); }, r.le, 1e-3);
    }
    r.sse = f(r.lb, r.le);
    return r;
}

SseData make_sse_data(const std::vector<ResponsePoint>& points, double d) {
    SseData data;
    data.log_d = std::log(d);
    data.log_c.reserve(points.size());
    data.y.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.concentration > 0.0)) {
            throw DomainError("fit points must have positive concentrations");
        }
        data.log_c.push_back(std::log(p.concentration));
        data.y.push_back(p.y);
    }
    return data;
}

CurveFit fit_from_data(const SseData& data, double d, bool multi_start, double lb_init,
                       double le_init) {
    OptResult best;
    bool any_tol = false;
    if (multi_start) {
        const auto [it_min, it_max] = std::minmax_element(data.log_c.begin(), data.log_c.end());
        const double log_cmin = *it_min;
        const double log_cmax = *it_max;
        double log_cmean = 0.0;
        for (double lc : data.log_c) log_cmean += lc;
        log_cmean /= static_cast<double>(data.log_c.size());
        // e starts at {min, geometric mean, max} of tested concentrations,
        // b starts at {0.3, 1, 3}: the SSE surface is multimodal for steep
        // curves.
        const std::array<double, 3> le_starts = {log_cmin, log_cmean, log_cmax};
        const std::array<double, 3> lb_starts = {std::log(0.3), 0.0, std::log(3.0)};
        for (double le0 : le_starts) {
            for (double lb0 : lb_starts) {
                OptResult r = nelder_mead(data, lb0, le0, 0.5, 500);
                if (r.sse < best.sse) best = r;
                any_tol = any_tol || r.tol_met;
            }
        }
    } else {
        best = nelder_mead(data, lb_init, le_init, 0.1, 500);
        any_tol = best.tol_met;
    }
    best = refine_coordinates(data, best);

    CurveFit fit;
    fit.d = d;
    fit.b = std::exp(best.lb);
    fit.e = std::exp(best.le);
    fit.sse = best.sse;
    fit.n_points = static_cast<int>(data.y.size());
    fit.sigma = std::sqrt(best.sse / static_cast<double>(fit.n_points - 2));

    // Identifiability guard: a flat or degenerate response surface drives
    // the optimum to absurd scales (e out of any plausible range, b at the
    // numeric floor). Such fits are reported but flagged unconverged.
    const double cmin = std::exp(*std::min_element(data.log_c.begin(), data.log_c.end()));
    const double cmax = std::exp(*std::max_element(data.log_c.begin(), data.log_c.end()));
    const bool sane = std::isfinite(fit.b) && std::isfinite(fit.e) && fit.b > 1e-6 &&
                      fit.b < 1e6 && fit.e > cmin * 1e-6 && fit.e < cmax * 1e6;
    fit.converged = any_tol && best.tol_met && sane;
    return fit;
}

} // namespace

CurveFit fit_curve(const std::vector<ResponsePoint>& points, double d) {
    if (!(d > 0.0)) throw DomainError("control level d must be > 0");
    std::set<double> distinct;
    for (const auto& p : points) distinct.insert(p.concentration);
    if (distinct.size() < 3) {
        throw InsufficientDataError("fit_curve needs >= 3 distinct concentrations, got " +
                                    std::to_string(distinct.size()));
    }
    const SseData data = make_sse_data(points, d);
    CurveFit fit = fit_from_data(data, d, true, 0.0, 0.0);
    if (!points.empty()) {
        fit.species_id = points.front().species_id;
        fit.contaminant_id = points.front().contaminant_id;
    }
    return fit;
}

EcEstimate bootstrap_ec(const std::vector<ResponsePoint>& points, double d, double x, int n_boot,
                        std::uint64_t seed) {
    if (n_boot < 200) throw DomainError("bootstrap_ec requires n_boot >= 200");
    const CurveFit fit = fit_curve(points, d); // throws if the base fit is impossible
    const double point = ec_x(fit, x);
    const double lb_hat = std::log(fit.b);
    const double le_hat = std::log(fit.e);

    // Strata: indices of points sharing a concentration level.
    std::map<double, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < points.size(); ++i) strata[points[i].concentration].push_back(i);

    std::vector<double> ecs;
    ecs.reserve(static_cast<std::size_t>(n_boot));
    int failed = 0;
    std::vector<ResponsePoint> resample(points.size());
    for (int rep = 0; rep < n_boot; ++rep) {
        RngStream rng(seed, RngDomain::bootstrap, static_cast<std::uint64_t>(rep));
        std::size_t k = 0;
        for (const auto& [conc, idx] : strata) {
            for (std::size_t j = 0; j < idx.size(); ++j) {
                resample[k++] = points[idx[rng.uniform_int(idx.size())]];
            }
        }
        try {
            const SseData data = make_sse_data(resample, d);
            // Refit starts from the full-sample optimum; resampled surfaces
            // stay close to it, so no multi-start is needed here.
            const CurveFit rf = fit_from_data(data, d, false, lb_hat, le_hat);
            if (!rf.converged) {
                ++failed;
                continue;
            }
            ecs.push_back(ec_x(rf, x));
        } catch (const Error&) {
            ++failed;
        }
    }
    const double failure_fraction = static_cast<double>(failed) / static_cast<double>(n_boot);
    if (failure_fraction > 0.5) {
        throw UnstableFitError("bootstrap_ec: " + std::to_string(failed) + "/" +
                                   std::to_string(n_boot) + " resamples failed to converge",
                               failure_fraction);
    }
    std::sort(ecs.begin(), ecs.end());
    EcEstimate est;
    est.x = x;
    est.point = point;
    // Percentile interval, widened if needed so the point estimate is inside.
    est.ci_low = std::min(stats::quantile_sorted(ecs, 0.025), point);
    est.ci_high = std::max(stats::quantile_sorted(ecs, 0.975), point);
    est.n_boot = n_boot;
    est.n_failed = failed;
    return est;
}

} // namespace hssd
