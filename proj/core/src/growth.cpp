#include "sustain/growth.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sustain {

namespace {

// |r| below this, or an insignificant p-value, marks a correlation as not
// meaningful ("n.m." in output).
constexpr double kMeaningfulR = 0.5;
constexpr double kMeaningfulP = 0.05;

double two_sided_p(double r, size_t n) {
    // exact t with n-2 degrees of freedom
    double one_minus_r2 = (1.0 - r) * (1.0 + r);
    if (one_minus_r2 <= 0.0) return 0.0;  // |r| == 1
    double t = r * std::sqrt(static_cast<double>(n - 2) / one_minus_r2);
    boost::math::students_t dist(static_cast<double>(n - 2));
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    size_t n = x.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least 2 points");
    double xbar = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - xbar;
        double dy = y[i] - ybar;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Correlation c;
    if (sxx == 0.0 || syy == 0.0) return c;  // zero variance: r undefined, n.m.
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    c.r = r;
    if (n >= 3) c.p_value = two_sided_p(r, n);
    c.meaningful = std::abs(r) >= kMeaningfulR && c.p_value.has_value() &&
                   *c.p_value <= kMeaningfulP;
    return c;
}

GrowthFit fit_log_growth(const AnnualSeries& series, CorrelationBasis basis) {
    size_t n = series.values.size();
    if (n < 2)
        throw DataError("fit_log_growth: series " + series.name + " has fewer than 2 observations");
    std::vector<double> t(n), logv(n);
    for (size_t i = 0; i < n; ++i) {
        double v = series.values[i];
        if (!(v > 0.0))
            throw DataError("fit_log_growth: non-positive value in " + series.name + " at year " +
                            std::to_string(series.start_year + static_cast<int>(i)));
        t[i] = static_cast<double>(i);
        logv[i] = std::log(v);
    }
    double tbar = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    double ybar = std::accumulate(logv.begin(), logv.end(), 0.0) / static_cast<double>(n);
    double stt = 0.0, sty = 0.0;
    for (size_t i = 0; i < n; ++i) {
        stt += (t[i] - tbar) * (t[i] - tbar);
        sty += (t[i] - tbar) * (logv[i] - ybar);
    }
    GrowthFit fit;
    fit.series_name = series.name;
    fit.n_periods = static_cast<int>(n) - 1;
    fit.slope = sty / stt;
    fit.reported_rate = std::expm1(fit.slope);
    fit.base_value = series.values.front();
    fit.base_year = series.start_year;
    fit.correlation =
        basis == CorrelationBasis::LogValues ? pearson(t, logv) : pearson(t, series.values);
    return fit;
}

double project(double base_value, double rate, int periods) {
    if (!(base_value > 0.0)) throw std::invalid_argument("project: base value must be positive");
    if (periods < 0) throw std::invalid_argument("project: periods must be non-negative");
    return base_value * std::exp(rate * static_cast<double>(periods));
}

double average_growth(const AnnualSeries& series, int base_year) {
    if (!series.covers(base_year))
        throw DataError("average_growth: base year " + std::to_string(base_year) + " not in " +
                        series.name);
    int final_year = series.last_year();
    if (final_year == base_year)
        throw std::invalid_argument("average_growth: base year equals final year");
    return (series.at(final_year) - series.at(base_year)) /
           static_cast<double>(final_year - base_year);
}

AnnualSeries average_growth_path(const AnnualSeries& series, int base_year) {
    if (!series.covers(base_year))
        throw DataError("average_growth_path: base year " + std::to_string(base_year) + " not in " +
                        series.name);
    if (series.last_year() == base_year)
        throw std::invalid_argument("average_growth_path: base year is the final year");
    AnnualSeries out;
    out.name = "average_growth";
    out.unit = series.unit;
    out.start_year = base_year + 1;
    double base = series.at(base_year);
    for (int y = base_year + 1; y <= series.last_year(); ++y)
        out.values.push_back((series.at(y) - base) / static_cast<double>(y - base_year));
    return out;
}

AnnualSeries marginal_growth(const AnnualSeries& series) {
    if (series.size() < 2)
        throw DataError("marginal_growth: series " + series.name + " has fewer than 2 observations");
    AnnualSeries out;
    out.name = "marginal_growth";
    out.unit = series.unit;
    out.start_year = series.start_year + 1;
    for (int y = series.start_year + 1; y <= series.last_year(); ++y)
        out.values.push_back(series.at(y) - series.at(y - 1));
    return out;
}

}  // namespace sustain
