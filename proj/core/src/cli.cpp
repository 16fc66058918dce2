#include "sustain/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sustain/chart.hpp"
#include "sustain/gateway.hpp"
#include "sustain/growth.hpp"
#include "sustain/scenario.hpp"
#include "sustain/series.hpp"
#include "sustain/sustainability.hpp"

namespace sustain::cli {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fmt_prec(double v, int precision, const char* default_spec) {
    if (precision < 0) return fmt(default_spec, v);
    char spec[16];
    std::snprintf(spec, sizeof(spec), "%%.%dg", precision);
    return fmt(spec, v);
}

void write_payload(const std::string& payload, const std::optional<std::string>& out_file,
                   std::ostream& out) {
    if (!out_file) {
        out << payload;
        return;
    }
    std::ofstream f(*out_file, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + *out_file);
    f << payload;
}

std::string now_stamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ReportFormat parse_format(const std::string& s) {
    if (s == "table") return ReportFormat::TableText;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "structured") return ReportFormat::Structured;
    throw CLI::ValidationError("--format", "expected table, csv or structured");
}

std::string sigma_text(const SigmaAssessment& a, int precision) {
    if (a.indeterminate()) return "indeterminate";
    std::string s = fmt_prec(*a.sigma, precision, "%.2f");
    return s + " " + std::string(to_string(*a.band));
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + p.string());
    f << bytes;
}

std::string fit_line(const GrowthFit& fit, int precision) {
    std::string rate = precision < 0 ? fmt("%.2f", fit.reported_rate * 100.0)
                                     : fmt_prec(fit.reported_rate * 100.0, precision, "%.2f");
    std::string r = "n.m.";
    if (fit.correlation.r)
        r = precision < 0 ? fmt("%.2f", *fit.correlation.r)
                          : fmt_prec(*fit.correlation.r, precision, "%.2f");
    std::string line = "rate=" + rate + "% r=" + r;
    if (fit.correlation.r && !fit.correlation.meaningful) line += " (n.m.)";
    return line;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"health financing sustainability toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    bool offline = false;
    bool no_meta = false;
    int precision = -1;
    std::string cache_dir;
    app.add_flag("--offline", offline, "never touch the network; use fixtures and cache only");
    app.add_flag("--no-meta", no_meta, "suppress provenance footers");
    app.add_option("--precision", precision, "significant digits for printed numbers");
    app.add_option("--cache-dir", cache_dir, "cache root (default $SUSTAIN_CACHE_DIR)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a CSV and emit its canonical form");
    std::string ingest_path, ingest_schema, ingest_source;
    std::optional<std::string> ingest_out;
    ingest->add_option("csv", ingest_path, "input CSV file")->required();
    ingest->add_option("--schema", ingest_schema, "column mapping")->required();
    ingest->add_option("--out", ingest_out, "write canonical CSV here instead of stdout");
    ingest->add_option("--source", ingest_source, "provenance label");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "log-linear growth fit for one series");
    std::string fit_dataset, fit_series, fit_schema;
    bool fit_raw_corr = false;
    fit_cmd->add_option("dataset", fit_dataset, "fixture name or CSV path")->required();
    fit_cmd->add_option("series", fit_series, "series name")->required();
    fit_cmd->add_option("--schema", fit_schema, "column mapping (CSV paths only)");
    fit_cmd->add_flag("--raw-corr", fit_raw_corr, "correlate raw values instead of logs");

    // project
    auto* project_cmd = app.add_subcommand("project", "continuous-compounding projection");
    double project_base = 0.0, project_rate = 0.0;
    int project_periods = 0;
    project_cmd->add_option("base", project_base, "base value")->required();
    project_cmd->add_option("rate", project_rate, "continuous per-period rate")->required();
    project_cmd->add_option("periods", project_periods, "number of periods")->required();

    // sigma
    auto* sigma_cmd = app.add_subcommand("sigma", "sustainability index for one period");
    std::string sigma_mode;
    std::vector<double> sigma_inputs;
    double sigma_epsilon = 0.05;
    sigma_cmd->add_option("--mode", sigma_mode, "full | dp0 | dy0")->required();
    sigma_cmd->add_option("inputs", sigma_inputs,
                          "full: P0 P1 phi0 phi1 Y0 Y1; dp0: Pphi0 Pphi1 Y0 Y1; dy0: P0 P1 Pphi");
    sigma_cmd->add_option("--epsilon", sigma_epsilon, "band half-width (default 0.05)");

    // assess
    auto* assess_cmd = app.add_subcommand("assess", "full plan assessment from a plan spec");
    std::string assess_spec, assess_format = "table";
    std::optional<std::string> assess_out;
    assess_cmd->add_option("planspec", assess_spec, "plan spec JSON file")->required();
    assess_cmd->add_option("--format", assess_format, "table | csv | structured");
    assess_cmd->add_option("--out", assess_out, "write the report here instead of stdout");

    // stress
    auto* stress_cmd = app.add_subcommand("stress", "GDP growth-rate stress sweep");
    std::string stress_spec, stress_format = "table";
    std::vector<double> stress_rates;
    std::optional<std::string> stress_out;
    stress_cmd->add_option("planspec", stress_spec, "plan spec JSON file")->required();
    stress_cmd->add_option("--rates", stress_rates, "continuous GDP rates")
        ->required()
        ->delimiter(',');
    stress_cmd->add_option("--format", stress_format, "table | csv | structured");
    stress_cmd->add_option("--out", stress_out, "write the table here instead of stdout");

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "emit SVG charts and CSVs from a report");
    std::string plot_report, plot_dir;
    plot_cmd->add_option("report", plot_report, "structured report JSON file")->required();
    plot_cmd->add_option("--out", plot_dir, "output directory")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("sustain");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (!cache_dir.empty()) setenv("SUSTAIN_CACHE_DIR", cache_dir.c_str(), 1);

    try {
        if (*ingest) {
            CsvSchema schema = CsvSchema::parse(ingest_schema);
            Dataset ds = load_csv(ingest_path, schema,
                                  ingest_source.empty() ? ingest_path : ingest_source);
            write_payload(canonical_csv(ds), ingest_out, out);
            if (!no_meta)
                err << "loaded " << ds.series().size() << " series, " << ds.shares().size()
                    << " share rows from " << ingest_path << "\n";
            return 0;
        }

        if (*fit_cmd) {
            std::optional<CsvSchema> schema;
            if (!fit_schema.empty()) schema = CsvSchema::parse(fit_schema);
            Dataset ds = resolve_dataset(fit_dataset, schema, offline);
            GrowthFit fit = fit_log_growth(
                ds.at(fit_series),
                fit_raw_corr ? CorrelationBasis::RawValues : CorrelationBasis::LogValues);
            out << fit_line(fit, precision) << "\n";
            return 0;
        }

        if (*project_cmd) {
            double v = project(project_base, project_rate, project_periods);
            out << fmt_prec(v, precision, "%.2f") << "\n";
            return 0;
        }

        if (*sigma_cmd) {
            SigmaAssessment a;
            if (sigma_mode == "full") {
                if (sigma_inputs.size() != 6)
                    throw CLI::ValidationError("inputs", "full mode takes P0 P1 phi0 phi1 Y0 Y1");
                a = sigma_full(sigma_inputs[0], sigma_inputs[1], sigma_inputs[2], sigma_inputs[3],
                               sigma_inputs[4], sigma_inputs[5], sigma_epsilon);
            } else if (sigma_mode == "dp0") {
                if (sigma_inputs.size() != 4)
                    throw CLI::ValidationError("inputs", "dp0 mode takes Pphi0 Pphi1 Y0 Y1");
                a = sigma_dp_zero(sigma_inputs[0], sigma_inputs[1], sigma_inputs[2],
                                  sigma_inputs[3], sigma_epsilon);
            } else if (sigma_mode == "dy0") {
                if (sigma_inputs.size() != 3)
                    throw CLI::ValidationError("inputs", "dy0 mode takes P0 P1 Pphi");
                a = sigma_dy_zero(sigma_inputs[0], sigma_inputs[1], sigma_inputs[2], sigma_epsilon);
            } else {
                throw CLI::ValidationError("--mode", "expected full, dp0 or dy0");
            }
            out << sigma_text(a, precision) << "\n";
            return 0;
        }

        if (*assess_cmd) {
            ReportFormat format = parse_format(assess_format);
            PlanSpec spec = load_plan_spec(assess_spec, offline);
            AssessmentReport report = assess(spec);
            std::string payload = render_report(report, format);
            if (format == ReportFormat::TableText && !no_meta)
                payload += "\n-- plan spec: " + assess_spec + "; generated " + now_stamp() + "\n";
            write_payload(payload, assess_out, out);
            return 0;
        }

        if (*stress_cmd) {
            PlanSpec spec = load_plan_spec(stress_spec, offline);
            spec.stress_rates.clear();
            std::vector<StressResult> results = stress_gdp(spec, stress_rates);
            ReportFormat format = parse_format(stress_format);
            std::string payload;
            if (format == ReportFormat::TableText) {
                for (const auto& res : results) {
                    payload += "rate=" + fmt("%.6g", res.gdp_rate) + "\n";
                    for (const auto& a : res.sigma_series)
                        payload += "  " + a.period_label + "  " + sigma_text(a, precision) + "\n";
                }
            } else {
                AssessmentReport stub;
                stub.stress_results = results;
                payload = render_report(stub, format);
            }
            write_payload(payload, stress_out, out);
            return 0;
        }

        if (*plot_cmd) {
            std::ifstream in(plot_report);
            if (!in) throw DataError("cannot open report " + plot_report);
            std::stringstream buf;
            buf << in.rdbuf();
            AssessmentReport report = parse_report(buf.str());
            std::filesystem::path dir(plot_dir);
            std::filesystem::create_directories(dir);

            if (!report.coefficients.rows.empty()) {
                Chart chart;
                chart.title = "Health financing propensity";
                chart.x_label = "year";
                chart.y_label = "% of GDP";
                ChartSeries phi{"phi", {}}, pphi{"Pphi", {}};
                std::string csv = "year,phi,Pphi\n";
                for (const auto& r : report.coefficients.rows) {
                    phi.points.emplace_back(r.year, r.propensity * 100.0);
                    pphi.points.emplace_back(r.year, r.public_propensity * 100.0);
                    csv += std::to_string(r.year) + "," + fmt("%.17g", r.propensity) + "," +
                           fmt("%.17g", r.public_propensity) + "\n";
                }
                chart.series = {phi, pphi};
                write_file(dir / "propensity.svg", render_svg(chart));
                write_file(dir / "propensity.csv", csv);
                out << (dir / "propensity.svg").string() << "\n";
                out << (dir / "propensity.csv").string() << "\n";
            }

            {
                Chart chart;
                chart.title = "Sustainability index by year";
                chart.x_label = "year";
                chart.y_label = "sigma";
                chart.kind = ChartKind::Bar;
                ChartSeries sigma{"sigma", {}};
                std::string csv = "period,sigma,variant,band\n";
                for (const auto& a : report.sigma_series) {
                    csv += a.period_label + ",";
                    if (a.sigma) csv += fmt("%.17g", *a.sigma);
                    csv += "," + std::string(to_string(a.variant)) + ",";
                    if (a.band) csv += std::string(to_string(*a.band));
                    csv += "\n";
                    if (!a.sigma) continue;
                    try {
                        sigma.points.emplace_back(std::stod(a.period_label), *a.sigma);
                    } catch (const std::exception&) {
                        // non-numeric period labels stay CSV-only
                    }
                }
                if (!sigma.points.empty()) {
                    chart.series = {sigma};
                    write_file(dir / "sigma.svg", render_svg(chart));
                    out << (dir / "sigma.svg").string() << "\n";
                }
                write_file(dir / "sigma.csv", csv);
                out << (dir / "sigma.csv").string() << "\n";
            }

            if (!report.avg_growth.values.empty() || !report.marginal.values.empty()) {
                Chart chart;
                chart.title = "Public financing growth";
                chart.x_label = "year";
                chart.y_label = "per year";
                ChartSeries ag{"average_growth", {}}, mg{"marginal_growth", {}};
                int first = std::numeric_limits<int>::max();
                int last = std::numeric_limits<int>::min();
                for (const AnnualSeries* s : {&report.avg_growth, &report.marginal}) {
                    if (s->values.empty()) continue;
                    first = std::min(first, s->start_year);
                    last = std::max(last, s->last_year());
                }
                std::string csv = "year,average_growth,marginal_growth\n";
                for (int y = first; y <= last; ++y) {
                    csv += std::to_string(y) + ",";
                    if (report.avg_growth.covers(y)) {
                        ag.points.emplace_back(y, report.avg_growth.at(y));
                        csv += fmt("%.17g", report.avg_growth.at(y));
                    }
                    csv += ",";
                    if (report.marginal.covers(y)) {
                        mg.points.emplace_back(y, report.marginal.at(y));
                        csv += fmt("%.17g", report.marginal.at(y));
                    }
                    csv += "\n";
                }
                chart.series.clear();
                if (!ag.points.empty()) chart.series.push_back(ag);
                if (!mg.points.empty()) chart.series.push_back(mg);
                write_file(dir / "growth.svg", render_svg(chart));
                write_file(dir / "growth.csv", csv);
                out << (dir / "growth.svg").string() << "\n";
                out << (dir / "growth.csv").string() << "\n";
            }
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 2;
}

}  // namespace sustain::cli
