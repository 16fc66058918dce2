#include "sustain/sustainability.hpp"

#include <cmath>
#include <stdexcept>

namespace sustain {

namespace {

// Below this relative denominator magnitude the elasticity is reported
// indeterminate instead of exploding into a number.
constexpr double kDegenerateDenominator = 1e-9;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void require_positive(double v, const char* what) {
    require_finite(v, what);
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
        throw std::invalid_argument("epsilon must lie in (0, 0.5)");
}

}  // namespace

const CoefficientRow& CoefficientTable::row(int year) const {
    for (const auto& r : rows)
        if (r.year == year) return r;
    throw DataError("coefficient table has no row for year " + std::to_string(year));
}

CoefficientTable coefficient_table(const Dataset& dataset, double public_share) {
    if (!(public_share > 0.0) || public_share > 1.0)
        throw std::invalid_argument("public share must lie in (0, 1]");
    const AnnualSeries& gdp = dataset.require_role(SeriesRole::Gdp);
    const AnnualSeries& revenue = dataset.require_role(SeriesRole::Revenue);
    const AnnualSeries& interest = dataset.require_role(SeriesRole::Interest);
    const AnnualSeries& public_health = dataset.require_role(SeriesRole::PublicHealth);
    const std::string names[] = {gdp.name, revenue.name, interest.name, public_health.name};
    YearRange range = dataset.common_range(names);

    CoefficientTable table;
    for (int y = range.first; y <= range.last; ++y) {
        CoefficientRow row;
        row.year = y;
        row.revenue_ratio = revenue.at(y) / gdp.at(y);
        row.public_share = public_share;
        row.public_propensity = public_health.at(y) / gdp.at(y);
        row.propensity = row.public_propensity / public_share;
        row.interest_ratio = interest.at(y) / gdp.at(y);
        row.residual = row.revenue_ratio - row.interest_ratio - row.public_propensity;
        for (double v : {row.revenue_ratio, row.propensity, row.public_propensity,
                         row.interest_ratio, row.residual}) {
            if (!std::isfinite(v) || v <= -1.0 || v >= 1.0)
                throw DataError("coefficient outside (-1, 1) for year " + std::to_string(y));
        }
        table.rows.push_back(row);
    }
    return table;
}

BudgetDecomposition budget_decompose(const CoefficientTable& table, int year, double gdp,
                                     double omega) {
    require_positive(gdp, "gdp");
    require_finite(omega, "omega");
    const CoefficientRow& row = table.row(year);
    if (omega < 0.0) throw std::invalid_argument("omega must be non-negative");
    if (omega > row.public_propensity)
        throw std::invalid_argument("omega exceeds the public propensity: waste above financing");
    BudgetDecomposition d;
    d.year = year;
    d.gdp = gdp;
    d.omega = omega;
    d.revenue_term = row.revenue_ratio * gdp;
    d.health_term = (row.public_propensity - omega) * gdp;
    d.interest_term = row.interest_ratio * gdp;
    d.other_term = (row.revenue_ratio - (row.public_propensity - omega) - row.interest_ratio) * gdp;
    d.residual_check = d.revenue_term - d.health_term - d.interest_term - d.other_term;
    return d;
}

std::string_view to_string(Band b) {
    switch (b) {
        case Band::ReductionRisk: return "ReductionRisk";
        case Band::SpendingStabilized: return "SpendingStabilized";
        case Band::FinanciallySustainable: return "FinanciallySustainable";
        case Band::PropensityGrowthStabilized: return "PropensityGrowthStabilized";
        case Band::UnsustainableLower: return "UnsustainableLower";
        case Band::FinancialFiscalRisk: return "FinancialFiscalRisk";
    }
    return "?";
}

Band parse_band(std::string_view s) {
    if (s == "ReductionRisk") return Band::ReductionRisk;
    if (s == "SpendingStabilized") return Band::SpendingStabilized;
    if (s == "FinanciallySustainable") return Band::FinanciallySustainable;
    if (s == "PropensityGrowthStabilized") return Band::PropensityGrowthStabilized;
    if (s == "UnsustainableLower") return Band::UnsustainableLower;
    if (s == "FinancialFiscalRisk") return Band::FinancialFiscalRisk;
    throw DataError("unknown band '" + std::string(s) + "'");
}

Band classify(double sigma, double epsilon) {
    require_finite(sigma, "sigma");
    require_epsilon(epsilon);
    if (sigma < -1.0 - epsilon) return Band::ReductionRisk;
    if (sigma <= -1.0 + epsilon) return Band::SpendingStabilized;
    if (sigma < -epsilon) return Band::FinanciallySustainable;
    if (sigma <= epsilon) return Band::PropensityGrowthStabilized;
    if (sigma <= 1.0) return Band::UnsustainableLower;
    return Band::FinancialFiscalRisk;
}

std::string_view to_string(SigmaVariant v) {
    switch (v) {
        case SigmaVariant::Full: return "full";
        case SigmaVariant::DpZero: return "dp_zero";
        case SigmaVariant::Stabilized: return "stabilized";
        case SigmaVariant::DyZero: return "dy_zero";
    }
    return "?";
}

SigmaVariant parse_variant(std::string_view s) {
    if (s == "full") return SigmaVariant::Full;
    if (s == "dp_zero") return SigmaVariant::DpZero;
    if (s == "stabilized") return SigmaVariant::Stabilized;
    if (s == "dy_zero") return SigmaVariant::DyZero;
    throw DataError("unknown sigma variant '" + std::string(s) + "'");
}

SigmaAssessment sigma_full(double p0, double p1, double phi0, double phi1, double y0, double y1,
                           double epsilon) {
    require_positive(p0, "p0");
    require_positive(phi0, "phi0");
    require_positive(y0, "y0");
    require_finite(p1, "p1");
    require_finite(phi1, "phi1");
    require_finite(y1, "y1");
    require_epsilon(epsilon);

    SigmaAssessment a;
    a.variant = SigmaVariant::Full;
    a.epsilon = epsilon;
    a.inputs.p0 = p0;
    a.inputs.p1 = p1;
    a.inputs.phi0 = phi0;
    a.inputs.phi1 = phi1;
    a.inputs.y0 = y0;
    a.inputs.y1 = y1;

    const double dp = p1 - p0;
    const double dphi = phi1 - phi0;
    const double dy = y1 - y0;
    // expanded product differences: Delta(P*X) = dP*X0 + dX*P0 + dP*dX
    const double numerator = dp * phi0 + dphi * p0 + dp * dphi;
    const double denominator = dp * y0 + dy * p0 + dp * dy;
    if (std::abs(denominator / (p0 * y0)) <= kDegenerateDenominator) return a;

    const double sigma = numerator / denominator * y0 / phi0;
    a.sigma = sigma;
    a.band = classify(sigma, epsilon);
    return a;
}

SigmaAssessment sigma_dp_zero(double public_phi0, double public_phi1, double y0, double y1,
                              double epsilon) {
    require_positive(public_phi0, "public_phi0");
    require_positive(y0, "y0");
    require_finite(public_phi1, "public_phi1");
    require_finite(y1, "y1");
    require_epsilon(epsilon);

    SigmaAssessment a;
    a.variant = public_phi1 == public_phi0 ? SigmaVariant::Stabilized : SigmaVariant::DpZero;
    a.epsilon = epsilon;
    a.inputs.public_phi0 = public_phi0;
    a.inputs.public_phi1 = public_phi1;
    a.inputs.y0 = y0;
    a.inputs.y1 = y1;

    const double rel_dy = (y1 - y0) / y0;
    if (std::abs(rel_dy) <= kDegenerateDenominator) return a;

    const double sigma = ((public_phi1 - public_phi0) / public_phi0) / rel_dy;
    a.sigma = sigma;
    a.band = classify(sigma, epsilon);
    return a;
}

SigmaAssessment sigma_dy_zero(double p0, double p1, double public_phi, double epsilon) {
    require_positive(p0, "p0");
    require_finite(p1, "p1");
    require_positive(public_phi, "public_phi");
    require_epsilon(epsilon);

    SigmaAssessment a;
    a.variant = SigmaVariant::DyZero;
    a.epsilon = epsilon;
    a.inputs.p0 = p0;
    a.inputs.p1 = p1;
    a.inputs.public_phi0 = public_phi;
    a.inputs.public_phi1 = public_phi;
    if (p1 == p0) return a;  // no driver of change at all

    // the dP terms cancel: [dP*(H/Y) / (dP*Y)] * [Y/(H/Y)] = 1
    a.sigma = 1.0;
    a.band = classify(1.0, epsilon);
    return a;
}

}  // namespace sustain
