#include "hypersticks/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace hs {

double binomial_se(std::size_t successes, std::size_t n)
{
    if (n == 0) return 0.0;
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

MeanSe mean_se(const std::vector<double>& x)
{
    MeanSe r;
    if (x.empty()) return r;
    double s = 0;
    for (double v : x) s += v;
    const double n = static_cast<double>(x.size());
    r.mean = s / n;
    if (x.size() < 2) return r;
    double ss = 0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (n - 1) / n);
    return r;
}

double chi2_sf(double x, double dof)
{
    if (!(dof > 0)) throw std::invalid_argument("chi2_sf: dof must be positive");
    if (x <= 0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double jackknife_se(std::size_t groups, const std::function<double(std::size_t)>& est)
{
    if (groups < 2) return 0.0;
    std::vector<double> v(groups);
    double mean = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        v[g] = est(g);
        mean += v[g];
    }
    mean /= static_cast<double>(groups);
    double ss = 0;
    for (double e : v) ss += (e - mean) * (e - mean);
    const double G = static_cast<double>(groups);
    return std::sqrt((G - 1.0) / G * ss);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("fit_line: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw std::invalid_argument("fit_line: x values are all equal");
    LineFit f;
    f.n = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - f.intercept - f.slope * x[i];
            rss += e * e;
        }
        f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("fit_loglog: values must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

}  // namespace hs
