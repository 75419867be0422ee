#ifndef HSSD_DOSE_RESPONSE_HPP
#define HSSD_DOSE_RESPONSE_HPP

#include "hssd/dataset.hpp"

#include <cstdint>
#include <vector>

namespace hssd {

// Fitted three-parameter loglogistic curve for one (species, contaminant).
// d is fixed from the control summary; (b, e) minimize the SSE of the
// ln-scale error model, sigma = sqrt(SSE / (n - 2)).
struct CurveFit {
    std::string species_id;
    std::string contaminant_id;
    double b = 0.0;     // shape (slope)
    double e = 0.0;     // EC50, concentration units
    double d = 0.0;     // control response ratio
    double sigma = 0.0; // residual sd on the ln scale
    double sse = 0.0;
    int n_points = 0;
    bool converged = false;
};

// EC_x with a bootstrap percentile confidence interval.
struct EcEstimate {
    double x = 0.0;
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_boot = 0;
    int n_failed = 0; // non-converged resamples, dropped
};

// R(C) = d / (1 + (C/e)^b). Strictly decreasing in C, -> d as C -> 0.
double loglogistic(double concentration, double b, double e, double d);

// Nonlinear least squares on (ln b, ln e) by multi-start Nelder-Mead plus a
// coordinate refinement pass. Requires >= 3 distinct positive
// concentrations. Non-identifiable data comes back with converged == false
// and best-effort parameters.
CurveFit fit_curve(const std::vector<ResponsePoint>& points, double d);

// EC_x = e * (x/(100-x))^(1/b), x in percent.
double ec_x(double b, double e, double x);
double ec_x(const CurveFit& fit, double x);

// Non-parametric case bootstrap stratified by concentration level; each
// level keeps its replicate count. Deterministic: resample i draws from the
// stream derived from (seed, i). Resamples whose refit does not converge
// are dropped and counted; more than 50% dropped raises UnstableFitError.
EcEstimate bootstrap_ec(const std::vector<ResponsePoint>& points, double d, double x, int n_boot,
                        std::uint64_t seed);

// ln(1 + exp(t)) without overflow; shared with the hierarchical likelihood.
double softplus(double t);

} // namespace hssd

#endif // HSSD_DOSE_RESPONSE_HPP
