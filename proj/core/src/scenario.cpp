#include "sustain/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sustain/gateway.hpp"

namespace sustain {

namespace {

using nlohmann::json;

// Stress-sweep rates whose |dY/Y| falls below this are tabulated as
// indeterminate rather than extrapolated.
constexpr double kStressDegenerateZone = 1e-6;

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

// How the public propensity for one year was obtained.
enum class PropensitySource { CurrencyRatio, SharesTimesPhi, FractionSeries };

double dataset_public_phi(const Dataset& ds, int year, PropensitySource* source) {
    if (const AnnualSeries* ph = ds.by_role(SeriesRole::PublicHealth)) {
        if (ph->unit == Unit::CurrencyMillions && ph->covers(year)) {
            const AnnualSeries& gdp = ds.require_role(SeriesRole::Gdp);
            if (gdp.covers(year)) {
                if (source) *source = PropensitySource::CurrencyRatio;
                return ph->at(year) / gdp.at(year);
            }
        }
    }
    if (const AnnualSeries* h = ds.by_role(SeriesRole::TotalHealth)) {
        const AnnualSeries* gdp = ds.by_role(SeriesRole::Gdp);
        auto shares = ds.shares_at(year);
        if (h->covers(year) && gdp && gdp->covers(year) && shares) {
            if (source) *source = PropensitySource::SharesTimesPhi;
            return shares->public_share * h->at(year) / gdp->at(year);
        }
    }
    if (const AnnualSeries* ph = ds.by_role(SeriesRole::PublicHealth)) {
        if (ph->unit == Unit::Fraction && ph->covers(year)) {
            if (source) *source = PropensitySource::FractionSeries;
            return ph->at(year);
        }
    }
    throw DataError("cannot obtain the public propensity for year " + std::to_string(year) +
                    " from dataset '" + ds.provenance().source + "'");
}

struct PathContext {
    std::vector<int> plan_years;  // baseline_year + 1 .. last plan year
    double bridge_gdp = 0.0;
    double bridge_public_phi = 0.0;
    double bridge_public_share = 0.0;
    bool bridge_share_fallback = false;
    std::optional<double> bridge_public_health;  // currency, when available
    std::map<int, double> gdp;                   // plan years
    std::map<int, double> public_phi;            // plan years
    std::map<int, double> public_health;         // plan years, currency
    bool rounded_inputs = false;
};

PathContext build_paths(const PlanSpec& spec) {
    PathContext ctx;
    const Dataset& splice_source =
        spec.splice == SpliceRule::BaselineBridge ? spec.baseline : spec.plan;

    const AnnualSeries& plan_gdp = spec.plan.require_role(SeriesRole::Gdp);
    int first_plan = spec.baseline_year + 1;
    if (!plan_gdp.covers(first_plan))
        throw DataError("plan GDP does not cover the first plan year " + std::to_string(first_plan));
    for (int y = first_plan; y <= plan_gdp.last_year(); ++y) ctx.plan_years.push_back(y);

    const AnnualSeries& bridge_gdp_series = splice_source.require_role(SeriesRole::Gdp);
    if (!bridge_gdp_series.covers(spec.baseline_year))
        throw DataError("splice source has no GDP for the bridge year " +
                        std::to_string(spec.baseline_year));
    ctx.bridge_gdp = bridge_gdp_series.at(spec.baseline_year);

    PropensitySource src = PropensitySource::CurrencyRatio;
    ctx.bridge_public_phi = dataset_public_phi(splice_source, spec.baseline_year, &src);
    if (src == PropensitySource::FractionSeries) ctx.rounded_inputs = true;
    if (const AnnualSeries* ph = splice_source.by_role(SeriesRole::PublicHealth);
        ph && ph->unit == Unit::CurrencyMillions && ph->covers(spec.baseline_year))
        ctx.bridge_public_health = ph->at(spec.baseline_year);

    for (int y : ctx.plan_years) {
        ctx.gdp[y] = plan_gdp.at(y);
        PropensitySource psrc = PropensitySource::CurrencyRatio;
        ctx.public_phi[y] = dataset_public_phi(spec.plan, y, &psrc);
        if (psrc == PropensitySource::FractionSeries) ctx.rounded_inputs = true;
        if (const AnnualSeries* ph = spec.plan.by_role(SeriesRole::PublicHealth);
            ph && ph->unit == Unit::CurrencyMillions && ph->covers(y))
            ctx.public_health[y] = ph->at(y);
    }

    if (spec.public_share.is_constant()) {
        ctx.bridge_public_share = *spec.public_share.constant;
    } else {
        auto bridge_shares = splice_source.shares_at(spec.baseline_year);
        if (bridge_shares) {
            ctx.bridge_public_share = bridge_shares->public_share;
        } else {
            ctx.bridge_public_share = spec.public_share.at(ctx.plan_years.front());
            ctx.bridge_share_fallback = true;
        }
    }
    return ctx;
}

void validate_plan_spec(const PlanSpec& spec) {
    if (!(spec.omega >= 0.0) || !std::isfinite(spec.omega))
        throw std::invalid_argument("omega must be non-negative and finite");
    if (!(spec.epsilon > 0.0) || !(spec.epsilon < 0.5))
        throw std::invalid_argument("epsilon must lie in (0, 0.5)");
    if (!spec.public_share.is_constant() && spec.public_share.by_year.empty())
        throw DataError("public share path is neither constant nor per-year");
}

SigmaAssessment period_sigma(const PlanSpec& spec, double p0, double p1, double pphi0,
                             double pphi1, double y0, double y1, const std::string& label) {
    SigmaAssessment a;
    if (spec.public_share.is_constant()) {
        a = sigma_dp_zero(pphi0, pphi1, y0, y1, spec.epsilon);
    } else {
        a = sigma_full(p0, p1, pphi0 / p0, pphi1 / p1, y0, y1, spec.epsilon);
    }
    a.period_label = label;
    return a;
}

SigmaAssessment indeterminate_sigma(const PlanSpec& spec, double pphi0, double pphi1, double y0,
                                    double y1, const std::string& label) {
    SigmaAssessment a;
    a.variant = spec.public_share.is_constant() ? SigmaVariant::DpZero : SigmaVariant::Full;
    a.epsilon = spec.epsilon;
    a.inputs.public_phi0 = pphi0;
    a.inputs.public_phi1 = pphi1;
    a.inputs.y0 = y0;
    a.inputs.y1 = y1;
    a.period_label = label;
    return a;
}

}  // namespace

std::string_view to_string(SpliceRule r) {
    return r == SpliceRule::BaselineBridge ? "baseline" : "plan";
}

SpliceRule parse_splice_rule(std::string_view s) {
    if (s == "baseline") return SpliceRule::BaselineBridge;
    if (s == "plan") return SpliceRule::PlanBridge;
    throw DataError("unknown splice rule '" + std::string(s) + "'");
}

PublicSharePath PublicSharePath::constant_share(double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("public share must lie in (0, 1]");
    PublicSharePath path;
    path.constant = p;
    return path;
}

double PublicSharePath::at(int year) const {
    if (constant) return *constant;
    auto it = by_year.find(year);
    if (it == by_year.end())
        throw DataError("public share path has no value for year " + std::to_string(year));
    return it->second;
}

AssessmentReport assess(const PlanSpec& spec) {
    validate_plan_spec(spec);
    PathContext ctx = build_paths(spec);
    AssessmentReport report;
    std::vector<std::string> skip_notes;

    // Growth fits over every plan series that admits a log fit.
    for (const auto& [name, series] : spec.plan.series()) {
        bool fittable = series.size() >= 2 &&
                        std::all_of(series.values.begin(), series.values.end(),
                                    [](double v) { return v > 0.0; });
        if (!fittable) {
            skip_notes.push_back("growth fit skipped for '" + name +
                                 "': needs at least 2 positive observations");
            continue;
        }
        report.growth_fits.push_back(fit_log_growth(series));
    }

    // Spliced public financing and propensity paths (bridge year + plan
    // years), the series the sigma computation actually runs on.
    if (ctx.bridge_public_health && !ctx.public_health.empty() &&
        ctx.public_health.size() == ctx.plan_years.size()) {
        AnnualSeries spliced;
        spliced.name = "public_financing";
        spliced.unit = Unit::CurrencyMillions;
        spliced.start_year = spec.baseline_year;
        spliced.values.push_back(*ctx.bridge_public_health);
        for (int y : ctx.plan_years) spliced.values.push_back(ctx.public_health.at(y));
        report.growth_fits.push_back(fit_log_growth(spliced));
    }
    {
        AnnualSeries spliced;
        spliced.name = "public_propensity";
        spliced.unit = Unit::Fraction;
        spliced.start_year = spec.baseline_year;
        spliced.values.push_back(ctx.bridge_public_phi);
        for (int y : ctx.plan_years) spliced.values.push_back(ctx.public_phi.at(y));
        report.growth_fits.push_back(fit_log_growth(spliced));
    }

    // Coefficient table, when the plan carries the fiscal series for it.
    bool has_fiscal = spec.plan.by_role(SeriesRole::Revenue) &&
                      spec.plan.by_role(SeriesRole::Interest) &&
                      spec.plan.by_role(SeriesRole::Gdp) &&
                      spec.plan.by_role(SeriesRole::PublicHealth) &&
                      spec.plan.by_role(SeriesRole::PublicHealth)->unit == Unit::CurrencyMillions;
    if (has_fiscal && spec.public_share.is_constant()) {
        report.coefficients = coefficient_table(spec.plan, *spec.public_share.constant);
    } else if (has_fiscal) {
        // per-year P over the plan years
        const AnnualSeries& gdp = spec.plan.require_role(SeriesRole::Gdp);
        const AnnualSeries& revenue = spec.plan.require_role(SeriesRole::Revenue);
        const AnnualSeries& interest = spec.plan.require_role(SeriesRole::Interest);
        const AnnualSeries& ph = spec.plan.require_role(SeriesRole::PublicHealth);
        for (int y : ctx.plan_years) {
            if (!gdp.covers(y) || !revenue.covers(y) || !interest.covers(y) || !ph.covers(y))
                continue;
            CoefficientRow row;
            row.year = y;
            row.revenue_ratio = revenue.at(y) / gdp.at(y);
            row.public_share = spec.public_share.at(y);
            row.public_propensity = ph.at(y) / gdp.at(y);
            row.propensity = row.public_propensity / row.public_share;
            row.interest_ratio = interest.at(y) / gdp.at(y);
            row.residual = row.revenue_ratio - row.interest_ratio - row.public_propensity;
            report.coefficients.rows.push_back(row);
        }
    } else {
        skip_notes.push_back(
            "coefficient table skipped: plan lacks revenue/interest/gdp/public-health series");
    }

    // Per-year sigma over the plan horizon.
    for (size_t i = 0; i < ctx.plan_years.size(); ++i) {
        int y = ctx.plan_years[i];
        double pphi0 = i == 0 ? ctx.bridge_public_phi : ctx.public_phi.at(y - 1);
        double y0 = i == 0 ? ctx.bridge_gdp : ctx.gdp.at(y - 1);
        double p0 = spec.public_share.is_constant()
                        ? *spec.public_share.constant
                        : (i == 0 ? ctx.bridge_public_share : spec.public_share.at(y - 1));
        double p1 = spec.public_share.is_constant() ? *spec.public_share.constant
                                                    : spec.public_share.at(y);
        report.sigma_series.push_back(period_sigma(spec, p0, p1, pphi0, ctx.public_phi.at(y), y0,
                                                   ctx.gdp.at(y), std::to_string(y)));
    }

    // Endpoint sigma: bridge year to last plan year, labelled as such.
    {
        int last = ctx.plan_years.back();
        double p1 = spec.public_share.is_constant() ? *spec.public_share.constant
                                                    : spec.public_share.at(last);
        report.endpoint_sigma = period_sigma(spec, ctx.bridge_public_share, p1,
                                             ctx.bridge_public_phi, ctx.public_phi.at(last),
                                             ctx.bridge_gdp, ctx.gdp.at(last),
                                             std::to_string(spec.baseline_year) + "-" +
                                                 std::to_string(last) + " endpoint");
    }

    // Average and marginal growth of nominal public health financing.
    if (const AnnualSeries* ph = spec.plan.by_role(SeriesRole::PublicHealth);
        ph && ph->unit == Unit::CurrencyMillions && ph->size() >= 2) {
        report.marginal = marginal_growth(*ph);
        int base = ctx.plan_years.front();
        if (ph->covers(base) && ph->last_year() > base)
            report.avg_growth = average_growth_path(*ph, base);
    } else {
        skip_notes.push_back("growth series skipped: plan has no nominal public health financing");
    }

    if (!spec.stress_rates.empty()) report.stress_results = stress_gdp(spec, spec.stress_rates);

    // Methodology notes, in a fixed order so reports are byte-stable.
    report.notes.push_back("baseline: " + spec.baseline.provenance().source + " (bridge year " +
                           std::to_string(spec.baseline_year) + "); plan: " +
                           spec.plan.provenance().source);
    report.notes.push_back("splice: bridge-year propensity from the " +
                           std::string(to_string(spec.splice)) + " dataset");
    report.notes.push_back(ctx.rounded_inputs
                               ? "rounded-input mode: at least one propensity was taken from a "
                                 "fraction series instead of currency ratios"
                               : "propensities recomputed from currency series at full precision");
    report.notes.push_back(spec.public_share.is_constant()
                               ? "public share path: constant P=" +
                                     fmt("%.6g", *spec.public_share.constant)
                               : "public share path: per-year (" +
                                     std::to_string(spec.public_share.by_year.size()) + " years)");
    if (ctx.bridge_share_fallback)
        report.notes.push_back("bridge public share taken from the first plan year");
    report.notes.push_back("omega=" + fmt("%.6g", spec.omega) +
                           " (budget-identity pass-through; sigma is omega-invariant)");
    report.notes.push_back("endpoint sigma uses endpoint differences, not a yearly average");
    bool any_lower = false;
    for (const auto& a : report.sigma_series)
        if (a.band && *a.band == Band::UnsustainableLower) any_lower = true;
    if (report.endpoint_sigma && report.endpoint_sigma->band &&
        *report.endpoint_sigma->band == Band::UnsustainableLower)
        any_lower = true;
    if (any_lower)
        report.notes.push_back(
            "band note: sigma in (epsilon, 1] is reported UnsustainableLower, the lower limit of "
            "financial unsustainability, even where summaries describe 0<sigma<1 as sustainable");
    for (auto& n : skip_notes) report.notes.push_back(std::move(n));
    return report;
}

std::vector<StressResult> stress_gdp(const PlanSpec& spec, std::span<const double> rate_grid) {
    validate_plan_spec(spec);
    if (rate_grid.empty()) throw std::invalid_argument("stress grid is empty");
    for (double r : rate_grid) {
        if (!std::isfinite(r) || r <= -1.0)
            throw std::invalid_argument("stress rates must be finite and > -1");
    }
    PathContext ctx = build_paths(spec);
    if (ctx.public_health.size() != ctx.plan_years.size())
        throw DataError("stress_gdp needs nominal public health spending for every plan year");

    std::vector<double> rates(rate_grid.begin(), rate_grid.end());
    std::sort(rates.begin(), rates.end());

    std::vector<StressResult> results;
    results.reserve(rates.size());
    for (double rate : rates) {
        StressResult res;
        res.gdp_rate = rate;
        double prev_pphi = ctx.bridge_public_phi;
        double prev_y = ctx.bridge_gdp;
        for (int y : ctx.plan_years) {
            int t = y - spec.baseline_year;
            double stressed_y = ctx.bridge_gdp * std::exp(rate * static_cast<double>(t));
            double pphi = ctx.public_health.at(y) / stressed_y;
            std::string label = std::to_string(y);
            double rel_dy = (stressed_y - prev_y) / prev_y;
            if (std::abs(rel_dy) < kStressDegenerateZone) {
                res.sigma_series.push_back(
                    indeterminate_sigma(spec, prev_pphi, pphi, prev_y, stressed_y, label));
            } else {
                double p0 = spec.public_share.is_constant()
                                ? *spec.public_share.constant
                                : (t == 1 ? ctx.bridge_public_share : spec.public_share.at(y - 1));
                double p1 = spec.public_share.is_constant() ? *spec.public_share.constant
                                                            : spec.public_share.at(y);
                res.sigma_series.push_back(
                    period_sigma(spec, p0, p1, prev_pphi, pphi, prev_y, stressed_y, label));
            }
            prev_pphi = pphi;
            prev_y = stressed_y;
        }
        results.push_back(std::move(res));
    }
    return results;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

json series_to_json(const AnnualSeries& s) {
    if (s.values.empty()) return nullptr;
    json j;
    j["name"] = s.name;
    j["unit"] = std::string(to_string(s.unit));
    j["start_year"] = s.start_year;
    j["values"] = s.values;
    return j;
}

AnnualSeries series_from_json(const json& j) {
    AnnualSeries s;
    if (j.is_null()) return s;
    s.name = j.at("name").get<std::string>();
    s.unit = parse_unit(j.at("unit").get<std::string>());
    s.start_year = j.at("start_year").get<int>();
    s.values = j.at("values").get<std::vector<double>>();
    return s;
}

json sigma_to_json(const SigmaAssessment& a) {
    json j;
    j["period"] = a.period_label;
    j["sigma"] = a.sigma ? json(*a.sigma) : json(nullptr);
    j["variant"] = std::string(to_string(a.variant));
    j["band"] = a.band ? json(std::string(to_string(*a.band))) : json(nullptr);
    j["epsilon"] = a.epsilon;
    json inputs = json::object();
    auto put = [&inputs](const char* key, const std::optional<double>& v) {
        if (v) inputs[key] = *v;
    };
    put("p0", a.inputs.p0);
    put("p1", a.inputs.p1);
    put("phi0", a.inputs.phi0);
    put("phi1", a.inputs.phi1);
    put("public_phi0", a.inputs.public_phi0);
    put("public_phi1", a.inputs.public_phi1);
    put("y0", a.inputs.y0);
    put("y1", a.inputs.y1);
    j["inputs"] = inputs;
    return j;
}

SigmaAssessment sigma_from_json(const json& j) {
    SigmaAssessment a;
    a.period_label = j.at("period").get<std::string>();
    if (!j.at("sigma").is_null()) a.sigma = j.at("sigma").get<double>();
    a.variant = parse_variant(j.at("variant").get<std::string>());
    if (!j.at("band").is_null()) a.band = parse_band(j.at("band").get<std::string>());
    a.epsilon = j.at("epsilon").get<double>();
    const json& inputs = j.at("inputs");
    auto get = [&inputs](const char* key) -> std::optional<double> {
        if (inputs.contains(key)) return inputs.at(key).get<double>();
        return std::nullopt;
    };
    a.inputs.p0 = get("p0");
    a.inputs.p1 = get("p1");
    a.inputs.phi0 = get("phi0");
    a.inputs.phi1 = get("phi1");
    a.inputs.public_phi0 = get("public_phi0");
    a.inputs.public_phi1 = get("public_phi1");
    a.inputs.y0 = get("y0");
    a.inputs.y1 = get("y1");
    return a;
}

json fit_to_json(const GrowthFit& f) {
    json j;
    j["series"] = f.series_name;
    j["n_periods"] = f.n_periods;
    j["slope"] = f.slope;
    j["reported_rate"] = f.reported_rate;
    j["pearson_r"] = f.correlation.r ? json(*f.correlation.r) : json(nullptr);
    j["p_value"] = f.correlation.p_value ? json(*f.correlation.p_value) : json(nullptr);
    j["meaningful"] = f.correlation.meaningful;
    j["base_year"] = f.base_year;
    j["base_value"] = f.base_value;
    return j;
}

GrowthFit fit_from_json(const json& j) {
    GrowthFit f;
    f.series_name = j.at("series").get<std::string>();
    f.n_periods = j.at("n_periods").get<int>();
    f.slope = j.at("slope").get<double>();
    f.reported_rate = j.at("reported_rate").get<double>();
    if (!j.at("pearson_r").is_null()) f.correlation.r = j.at("pearson_r").get<double>();
    if (!j.at("p_value").is_null()) f.correlation.p_value = j.at("p_value").get<double>();
    f.correlation.meaningful = j.at("meaningful").get<bool>();
    f.base_year = j.at("base_year").get<int>();
    f.base_value = j.at("base_value").get<double>();
    return f;
}

std::string render_structured(const AssessmentReport& report) {
    json j;
    j["format"] = "sustain-report";
    j["version"] = 1;
    j["growth_fits"] = json::array();
    for (const auto& f : report.growth_fits) j["growth_fits"].push_back(fit_to_json(f));
    j["coefficients"] = json::array();
    for (const auto& r : report.coefficients.rows) {
        json row;
        row["year"] = r.year;
        row["T"] = r.revenue_ratio;
        row["P"] = r.public_share;
        row["phi"] = r.propensity;
        row["Pphi"] = r.public_propensity;
        row["S"] = r.interest_ratio;
        row["residual"] = r.residual;
        j["coefficients"].push_back(row);
    }
    j["sigma"] = json::array();
    for (const auto& a : report.sigma_series) j["sigma"].push_back(sigma_to_json(a));
    j["endpoint_sigma"] =
        report.endpoint_sigma ? sigma_to_json(*report.endpoint_sigma) : json(nullptr);
    j["average_growth"] = series_to_json(report.avg_growth);
    j["marginal_growth"] = series_to_json(report.marginal);
    j["stress"] = json::array();
    for (const auto& s : report.stress_results) {
        json row;
        row["rate"] = s.gdp_rate;
        row["sigma"] = json::array();
        for (const auto& a : s.sigma_series) row["sigma"].push_back(sigma_to_json(a));
        j["stress"].push_back(row);
    }
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

std::string render_csv(const AssessmentReport& report) {
    std::string out;
    out += "# growth_fits\n";
    out += "series,n_periods,slope,reported_rate,pearson_r,p_value,meaningful,base_year,base_value\n";
    for (const auto& f : report.growth_fits) {
        out += csv_quote(f.series_name) + "," + std::to_string(f.n_periods) + "," +
               fmt_full(f.slope) + "," + fmt_full(f.reported_rate) + ",";
        out += f.correlation.r ? fmt_full(*f.correlation.r) : "";
        out += ",";
        out += f.correlation.p_value ? fmt_full(*f.correlation.p_value) : "";
        out += ",";
        out += f.correlation.meaningful ? "true" : "false";
        out += "," + std::to_string(f.base_year) + "," + fmt_full(f.base_value) + "\n";
    }
    if (!report.coefficients.rows.empty()) {
        out += "# coefficients\n";
        out += "year,T,P,phi,Pphi,S,residual\n";
        for (const auto& r : report.coefficients.rows) {
            out += std::to_string(r.year) + "," + fmt_full(r.revenue_ratio) + "," +
                   fmt_full(r.public_share) + "," + fmt_full(r.propensity) + "," +
                   fmt_full(r.public_propensity) + "," + fmt_full(r.interest_ratio) + "," +
                   fmt_full(r.residual) + "\n";
        }
    }
    auto sigma_line = [&out](const SigmaAssessment& a) {
        out += csv_quote(a.period_label) + ",";
        out += a.sigma ? fmt_full(*a.sigma) : "";
        out += "," + std::string(to_string(a.variant)) + ",";
        out += a.band ? std::string(to_string(*a.band)) : "";
        out += "," + fmt_full(a.epsilon) + "\n";
    };
    out += "# sigma\n";
    out += "period,sigma,variant,band,epsilon\n";
    for (const auto& a : report.sigma_series) sigma_line(a);
    if (report.endpoint_sigma) {
        out += "# endpoint\n";
        out += "period,sigma,variant,band,epsilon\n";
        sigma_line(*report.endpoint_sigma);
    }
    if (!report.avg_growth.values.empty() || !report.marginal.values.empty()) {
        out += "# growth\n";
        out += "year,average_growth,marginal_growth\n";
        int first = std::numeric_limits<int>::max();
        int last = std::numeric_limits<int>::min();
        for (const AnnualSeries* s : {&report.avg_growth, &report.marginal}) {
            if (s->values.empty()) continue;
            first = std::min(first, s->start_year);
            last = std::max(last, s->last_year());
        }
        for (int y = first; y <= last; ++y) {
            out += std::to_string(y) + ",";
            if (report.avg_growth.covers(y)) out += fmt_full(report.avg_growth.at(y));
            out += ",";
            if (report.marginal.covers(y)) out += fmt_full(report.marginal.at(y));
            out += "\n";
        }
    }
    if (!report.stress_results.empty()) {
        out += "# stress\n";
        out += "rate,period,sigma,variant,band\n";
        for (const auto& s : report.stress_results) {
            for (const auto& a : s.sigma_series) {
                out += fmt_full(s.gdp_rate) + "," + csv_quote(a.period_label) + ",";
                out += a.sigma ? fmt_full(*a.sigma) : "";
                out += "," + std::string(to_string(a.variant)) + ",";
                out += a.band ? std::string(to_string(*a.band)) : "";
                out += "\n";
            }
        }
    }
    out += "# notes\n";
    out += "note\n";
    for (const auto& n : report.notes) out += csv_quote(n) + "\n";
    return out;
}

std::string render_table(const AssessmentReport& report) {
    std::ostringstream os;
    char buf[160];
    os << "SUSTAINABILITY ASSESSMENT\n";
    os << "=========================\n";
    if (!report.growth_fits.empty()) {
        os << "\nGROWTH RATES (log regression)\n";
        std::snprintf(buf, sizeof(buf), "  %-28s %8s %9s %8s\n", "series", "periods", "rate", "r");
        os << buf;
        bool any_nm = false;
        for (const auto& f : report.growth_fits) {
            std::string r_text = "n.m.";
            if (f.correlation.r) {
                r_text = fmt("%.2f", *f.correlation.r);
                if (!f.correlation.meaningful) {
                    r_text += "*";
                    any_nm = true;
                }
            }
            std::snprintf(buf, sizeof(buf), "  %-28s %8d %8.2f%% %8s\n", f.series_name.c_str(),
                          f.n_periods, f.reported_rate * 100.0, r_text.c_str());
            os << buf;
        }
        if (any_nm) os << "  (* = correlation not meaningful)\n";
    }
    if (!report.coefficients.rows.empty()) {
        os << "\nCOEFFICIENTS (% of GDP; P = public share of total health financing)\n";
        std::snprintf(buf, sizeof(buf), "  %-6s %8s %8s %8s %8s %8s %12s\n", "year", "T", "P",
                      "phi", "Pphi", "S", "(T-S)-Pphi");
        os << buf;
        for (const auto& r : report.coefficients.rows) {
            std::snprintf(buf, sizeof(buf), "  %-6d %8.2f %8.2f %8.2f %8.2f %8.2f %12.2f\n",
                          r.year, r.revenue_ratio * 100.0, r.public_share * 100.0,
                          r.propensity * 100.0, r.public_propensity * 100.0,
                          r.interest_ratio * 100.0, r.residual * 100.0);
            os << buf;
        }
    }
    os << "\nSUSTAINABILITY INDEX\n";
    std::snprintf(buf, sizeof(buf), "  %-22s %10s  %-11s %s\n", "period", "sigma", "variant",
                  "band");
    os << buf;
    auto sigma_row = [&](const SigmaAssessment& a) {
        std::string value = a.sigma ? fmt("%.2f", *a.sigma) : "indeterminate";
        std::string band = a.band ? std::string(to_string(*a.band)) : "-";
        std::snprintf(buf, sizeof(buf), "  %-22s %10s  %-11s %s\n", a.period_label.c_str(),
                      value.c_str(), std::string(to_string(a.variant)).c_str(), band.c_str());
        os << buf;
    };
    for (const auto& a : report.sigma_series) sigma_row(a);
    if (report.endpoint_sigma) sigma_row(*report.endpoint_sigma);
    if (!report.avg_growth.values.empty() || !report.marginal.values.empty()) {
        os << "\nPUBLIC FINANCING GROWTH (per year)\n";
        std::snprintf(buf, sizeof(buf), "  %-6s %12s %12s\n", "year", "average", "marginal");
        os << buf;
        int first = std::numeric_limits<int>::max();
        int last = std::numeric_limits<int>::min();
        for (const AnnualSeries* s : {&report.avg_growth, &report.marginal}) {
            if (s->values.empty()) continue;
            first = std::min(first, s->start_year);
            last = std::max(last, s->last_year());
        }
        for (int y = first; y <= last; ++y) {
            std::string ag = report.avg_growth.covers(y) ? fmt("%.1f", report.avg_growth.at(y)) : "-";
            std::string mg = report.marginal.covers(y) ? fmt("%.1f", report.marginal.at(y)) : "-";
            std::snprintf(buf, sizeof(buf), "  %-6d %12s %12s\n", y, ag.c_str(), mg.c_str());
            os << buf;
        }
    }
    if (!report.stress_results.empty()) {
        os << "\nSTRESS (GDP growth-rate overrides; sigma per plan year)\n";
        std::snprintf(buf, sizeof(buf), "  %-10s", "rate");
        os << buf;
        for (const auto& a : report.stress_results.front().sigma_series) {
            std::snprintf(buf, sizeof(buf), " %10s", a.period_label.c_str());
            os << buf;
        }
        os << "\n";
        for (const auto& s : report.stress_results) {
            std::snprintf(buf, sizeof(buf), "  %-10s", fmt("%.4f", s.gdp_rate).c_str());
            os << buf;
            for (const auto& a : s.sigma_series) {
                std::string value = a.sigma ? fmt("%.2f", *a.sigma) : "indet.";
                std::snprintf(buf, sizeof(buf), " %10s", value.c_str());
                os << buf;
            }
            os << "\n";
        }
    }
    if (!report.notes.empty()) {
        os << "\nNOTES\n";
        for (const auto& n : report.notes) os << "  - " << n << "\n";
    }
    return os.str();
}

}  // namespace

std::string render_report(const AssessmentReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::TableText: return render_table(report);
        case ReportFormat::Csv: return render_csv(report);
        case ReportFormat::Structured: return render_structured(report);
    }
    throw std::invalid_argument("unknown report format");
}

AssessmentReport parse_report(std::string_view structured_json) {
    json j;
    try {
        j = json::parse(structured_json);
    } catch (const json::exception& e) {
        throw DataError(std::string("cannot parse structured report: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "sustain-report")
            throw DataError("not a sustain report");
        AssessmentReport report;
        for (const auto& f : j.at("growth_fits")) report.growth_fits.push_back(fit_from_json(f));
        for (const auto& r : j.at("coefficients")) {
            CoefficientRow row;
            row.year = r.at("year").get<int>();
            row.revenue_ratio = r.at("T").get<double>();
            row.public_share = r.at("P").get<double>();
            row.propensity = r.at("phi").get<double>();
            row.public_propensity = r.at("Pphi").get<double>();
            row.interest_ratio = r.at("S").get<double>();
            row.residual = r.at("residual").get<double>();
            report.coefficients.rows.push_back(row);
        }
        for (const auto& a : j.at("sigma")) report.sigma_series.push_back(sigma_from_json(a));
        if (!j.at("endpoint_sigma").is_null())
            report.endpoint_sigma = sigma_from_json(j.at("endpoint_sigma"));
        report.avg_growth = series_from_json(j.at("average_growth"));
        report.marginal = series_from_json(j.at("marginal_growth"));
        for (const auto& s : j.at("stress")) {
            StressResult res;
            res.gdp_rate = s.at("rate").get<double>();
            for (const auto& a : s.at("sigma")) res.sigma_series.push_back(sigma_from_json(a));
            report.stress_results.push_back(std::move(res));
        }
        report.notes = j.at("notes").get<std::vector<std::string>>();
        return report;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed structured report: ") + e.what());
    }
}

PlanSpec load_plan_spec(const std::filesystem::path& json_path, bool offline) {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot open plan spec " + json_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("cannot parse plan spec " + json_path.string() + ": " + e.what());
    }
    std::filesystem::path base_dir = json_path.parent_path();
    auto resolve_ref = [&](const json& node) -> Dataset {
        std::string ref = node.at("dataset").get<std::string>();
        std::optional<CsvSchema> schema;
        if (node.contains("schema"))
            schema = CsvSchema::parse(node.at("schema").get<std::string>());
        if (!find_fixture(ref)) {
            std::filesystem::path p(ref);
            if (p.is_relative()) p = base_dir / p;
            return resolve_dataset(p.string(), schema, offline);
        }
        return resolve_dataset(ref, schema, offline);
    };
    try {
        PlanSpec spec;
        spec.baseline = resolve_ref(j.at("baseline"));
        spec.baseline_year = j.at("baseline").at("year").get<int>();
        spec.plan = resolve_ref(j.at("plan"));
        const json& share = j.at("public_share");
        if (share.is_number()) {
            spec.public_share = PublicSharePath::constant_share(share.get<double>());
        } else if (share.is_object() && share.contains("csv")) {
            std::filesystem::path p(share.at("csv").get<std::string>());
            if (p.is_relative()) p = base_dir / p;
            CsvSchema schema;
            schema.series.push_back({"P", "P", Unit::Fraction, SeriesRole::None});
            Dataset ds = load_csv(p, schema, p.string());
            const AnnualSeries& s = ds.at("P");
            for (int y = s.start_year; y <= s.last_year(); ++y)
                spec.public_share.by_year[y] = s.at(y);
        } else {
            throw DataError("public_share must be a number or {\"csv\": path}");
        }
        if (j.contains("splice_rule"))
            spec.splice = parse_splice_rule(j.at("splice_rule").get<std::string>());
        if (j.contains("omega")) spec.omega = j.at("omega").get<double>();
        if (j.contains("epsilon")) spec.epsilon = j.at("epsilon").get<double>();
        if (j.contains("stress_rates"))
            spec.stress_rates = j.at("stress_rates").get<std::vector<double>>();
        return spec;
    } catch (const json::exception& e) {
        throw DataError("malformed plan spec " + json_path.string() + ": " + e.what());
    }
}

}  // namespace sustain
