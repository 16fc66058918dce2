#pragma once

#include <optional>
#include <span>
#include <string>

#include "sustain/series.hpp"

namespace sustain {

/// Pearson product-moment correlation together with its significance.
/// r is empty when either input has zero variance; such results print as
/// "n.m." (not meaningful). p_value is two-sided under the exact
/// t-distribution with n-2 degrees of freedom, empty when n < 3.
struct Correlation {
    std::optional<double> r;
    std::optional<double> p_value;
    bool meaningful = false;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Whether correlation in a growth fit is computed on (t, ln value) -
/// consistent with the log regression - or on raw values.
enum class CorrelationBasis { LogValues, RawValues };

/// Result of log-linear trend estimation on an annual series.
/// slope is the per-period continuous rate b from OLS of ln(value) on
/// t = 0..n; the reported rate is exp(b) - 1.
struct GrowthFit {
    std::string series_name;
    int n_periods = 0;  // observations - 1
    double slope = 0.0;
    double reported_rate = 0.0;
    Correlation correlation;
    double base_value = 0.0;  // observed value at t = 0
    int base_year = 0;
};

GrowthFit fit_log_growth(const AnnualSeries& series,
                         CorrelationBasis basis = CorrelationBasis::LogValues);

/// Continuous compounding: base_value * exp(rate * periods).
double project(double base_value, double rate, int periods);

/// Cumulative change per year between base_year and the final year:
/// (value(final) - value(base)) / (final - base).
double average_growth(const AnnualSeries& series, int base_year);

/// Average growth at every horizon past base_year, indexed by the end year.
AnnualSeries average_growth_path(const AnnualSeries& series, int base_year);

/// Year-over-year first differences, indexed by the later year.
AnnualSeries marginal_growth(const AnnualSeries& series);

}  // namespace sustain
