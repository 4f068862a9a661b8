// Small statistics helpers: standard errors, chi-square tail, jackknife, line fits.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hs {

double binomial_se(std::size_t successes, std::size_t n);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& x);

// Upper tail P(X > x) of a chi-square variable with dof degrees of freedom.
double chi2_sf(double x, double dof);

// Leave-one-group-out jackknife standard error. est(g) is the estimate with group g
// removed.
double jackknife_se(std::size_t groups, const std::function<double(std::size_t)>& est);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::size_t n = 0;
};
// Least squares y = a + b x. Throws on fewer than 2 points or constant x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Slope of log y against log x.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hs
