#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sustain/growth.hpp"
#include "sustain/series.hpp"
#include "sustain/sustainability.hpp"

namespace sustain {

/// Which dataset supplies the bridge-year propensity between the baseline
/// and the first plan year.
enum class SpliceRule { BaselineBridge, PlanBridge };

std::string_view to_string(SpliceRule r);
SpliceRule parse_splice_rule(std::string_view s);

/// Public share of total health financing over the plan years: either a
/// single constant or a per-year path covering every plan year.
struct PublicSharePath {
    std::optional<double> constant;
    std::map<int, double> by_year;

    static PublicSharePath constant_share(double p);
    bool is_constant() const { return constant.has_value(); }
    double at(int year) const;
};

/// Binds a baseline dataset (actuals) to a plan dataset for assessment.
/// Plan years are the years after baseline_year; they must be contiguous
/// and start at baseline_year + 1.
struct PlanSpec {
    Dataset baseline;
    int baseline_year = 0;
    Dataset plan;
    PublicSharePath public_share;
    SpliceRule splice = SpliceRule::BaselineBridge;
    double omega = 0.0;
    double epsilon = 0.05;
    std::vector<double> stress_rates;
};

struct StressResult {
    double gdp_rate = 0.0;
    std::vector<SigmaAssessment> sigma_series;
};

struct AssessmentReport {
    std::vector<GrowthFit> growth_fits;
    CoefficientTable coefficients;
    std::vector<SigmaAssessment> sigma_series;          // one per plan year
    std::optional<SigmaAssessment> endpoint_sigma;      // bridge -> last plan year
    AnnualSeries avg_growth;                            // public financing AG path
    AnnualSeries marginal;                              // public financing MG
    std::vector<StressResult> stress_results;
    std::vector<std::string> notes;
};

/// Full plan-assessment pipeline: growth fits, coefficient table, per-year
/// sigma with classification, endpoint sigma, AG/MG series, optional
/// stress sweep. Deterministic: identical PlanSpec gives identical bytes
/// from render_report.
AssessmentReport assess(const PlanSpec& spec);

/// Rebuilds the plan GDP path as Y0*e^{rate*t} while holding nominal
/// public health spending at plan values, then recomputes propensities and
/// sigma per year. Rates where |dY/Y| < 1e-6 are reported indeterminate.
std::vector<StressResult> stress_gdp(const PlanSpec& spec,
                                     std::span<const double> rate_grid);

enum class ReportFormat { TableText, Csv, Structured };

std::string render_report(const AssessmentReport& report, ReportFormat format);

/// Inverse of render_report(Structured); round-trips byte-for-byte.
AssessmentReport parse_report(std::string_view structured_json);

/// Reads a PlanSpec from a flat JSON config file. Dataset references are
/// fixture names or CSV paths (resolved relative to the config file);
/// CSV references carry a schema string.
PlanSpec load_plan_spec(const std::filesystem::path& json_path, bool offline = true);

}  // namespace sustain
