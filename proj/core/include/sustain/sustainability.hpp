#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sustain/series.hpp"

namespace sustain {

/// Per-year budget coefficients, all as fractions of GDP except the
/// public share P:
///   T    public revenue / GDP
///   P    public share of total health financing
///   phi  total health propensity H/Y
///   Pphi public propensity P*phi
///   S    sovereign interest / GDP
///   residual (T - S) - Pphi, the non-health fiscal space
struct CoefficientRow {
    int year = 0;
    double revenue_ratio = 0.0;
    double public_share = 0.0;
    double propensity = 0.0;
    double public_propensity = 0.0;
    double interest_ratio = 0.0;
    double residual = 0.0;
};

struct CoefficientTable {
    std::vector<CoefficientRow> rows;

    const CoefficientRow& row(int year) const;
    bool empty() const { return rows.empty(); }
};

/// Builds the coefficient table from a dataset carrying gdp, revenue,
/// interest and public health financing series, over their common year
/// range. P is exogenous and held constant.
CoefficientTable coefficient_table(const Dataset& dataset, double public_share);

/// Currency decomposition of the budget identity
///   T*Y - (P*phi - omega)*Y - S*Y - Gamma = 0
/// where Gamma (non-health public expenditure) closes the identity.
struct BudgetDecomposition {
    int year = 0;
    double gdp = 0.0;
    double revenue_term = 0.0;   // T*Y
    double health_term = 0.0;    // (P*phi - omega)*Y
    double interest_term = 0.0;  // S*Y
    double other_term = 0.0;     // Gamma
    double omega = 0.0;
    double residual_check = 0.0;
};

BudgetDecomposition budget_decompose(const CoefficientTable& table, int year,
                                     double gdp, double omega = 0.0);

/// Classification bands for the sustainability index.
enum class Band {
    ReductionRisk,               // sigma << -1: public health financing shrinks
    SpendingStabilized,          // sigma ~= -1: nominal public spending frozen
    FinanciallySustainable,      // -1 < sigma < 0
    PropensityGrowthStabilized,  // sigma ~= 0: propensity growth frozen
    UnsustainableLower,          // 0 < sigma <= 1: lower limit of unsustainability
    FinancialFiscalRisk,         // sigma > 1: financial and fiscal risk
};

std::string_view to_string(Band b);
Band parse_band(std::string_view s);

/// Total mapping of the real line onto bands. epsilon is the half-width
/// of the point categories at -1 and 0; must lie in (0, 0.5).
Band classify(double sigma, double epsilon = 0.05);

enum class SigmaVariant {
    Full,        // all three drivers vary
    DpZero,      // public share held fixed
    Stabilized,  // public share fixed and propensity change exactly zero
    DyZero,      // vanishing GDP change limit
};

std::string_view to_string(SigmaVariant v);
SigmaVariant parse_variant(std::string_view s);

/// Echo of the inputs a sigma value was computed from; only the fields
/// relevant to the variant are populated.
struct SigmaInputs {
    std::optional<double> p0, p1;
    std::optional<double> phi0, phi1;
    std::optional<double> public_phi0, public_phi1;
    std::optional<double> y0, y1;
};

/// One sustainability assessment. sigma is empty when the denominator is
/// degenerate: indeterminate is a first-class result, never an exception,
/// so scenario sweeps can tabulate it.
struct SigmaAssessment {
    std::string period_label;
    std::optional<double> sigma;
    SigmaVariant variant = SigmaVariant::Full;
    std::optional<Band> band;
    SigmaInputs inputs;
    double epsilon = 0.05;

    bool indeterminate() const { return !sigma.has_value(); }
};

/// sigma = [Delta(P*phi)/(P0*phi0)] / [Delta(P*Y)/(P0*Y0)], computed via
/// the expanded product-difference form
///   Delta(P*X) = dP*X0 + dX*P0 + dP*dX.
/// phi is the total propensity H/Y, so P*phi is the public propensity.
SigmaAssessment sigma_full(double p0, double p1, double phi0, double phi1,
                           double y0, double y1, double epsilon = 0.05);

/// Public share held fixed: sigma = [Delta(Pphi)/Pphi0] / [DeltaY/Y0].
/// Inputs must be unrounded ratios of currency series.
SigmaAssessment sigma_dp_zero(double public_phi0, double public_phi1,
                              double y0, double y1, double epsilon = 0.05);

/// Vanishing-GDP-change limit with the propensity held fixed: the share
/// variation cancels and sigma = 1 exactly. p1 == p0 leaves no driver of
/// change and yields indeterminate.
SigmaAssessment sigma_dy_zero(double p0, double p1, double public_phi,
                              double epsilon = 0.05);

}  // namespace sustain
