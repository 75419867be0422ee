#ifndef HSSD_STATS_HPP
#define HSSD_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace hssd::stats {

double mean(std::span<const double> x);

// ddof = 0 gives the 1/n MLE form, ddof = 1 the unbiased 1/(n-1) form.
double variance(std::span<const double> x, int ddof = 1);
double sd(std::span<const double> x, int ddof = 1);

// Quantile with linear interpolation between order statistics (the common
// "type 7" definition): h = (n-1)q. q in [0,1]. Argument vector is sorted
// in place by the _inplace variant; plain quantile() copies.
double quantile_sorted(std::span<const double> sorted, double q);
double quantile(std::vector<double> x, double q);
// nth_element based; O(n), mutates x. For large samples (SSD percentiles).
double quantile_inplace(std::vector<double>& x, double q);

// Standard normal quantile, Wichura's AS 241 (PPND16) rational
// approximation; relative error below 1e-15 across (0, 1).
double normal_quantile(double p);

double normal_cdf(double z);
double normal_logpdf(double x, double mu, double sd);

} // namespace hssd::stats

#endif // HSSD_STATS_HPP
