#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sustain {

/// Raised for anything wrong with input data: parse failures, schema
/// violations, broken series invariants. The CLI maps it to exit code 1.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

enum class Unit { CurrencyMillions, Fraction };

/// What a series means to the analysis layer. Assigned by the ingestion
/// schema; None for series that are carried along but not interpreted.
enum class SeriesRole { None, Gdp, TotalHealth, PublicHealth, Revenue, Interest };

std::string_view to_string(Unit u);
std::string_view to_string(SeriesRole r);
Unit parse_unit(std::string_view s);
SeriesRole parse_role(std::string_view s);

/// One named annual time series. Years are consecutive by construction:
/// observation i belongs to year start_year + i.
struct AnnualSeries {
    std::string name;
    Unit unit = Unit::CurrencyMillions;
    int start_year = 0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    int last_year() const { return start_year + static_cast<int>(values.size()) - 1; }
    bool covers(int year) const { return !values.empty() && year >= start_year && year <= last_year(); }
    double at(int year) const;
};

/// Financing shares (public / out-of-pocket / privately insured) for one
/// year. After normalization the triple sums to exactly 1.
struct SharesTriple {
    int year = 0;
    double public_share = 0.0;
    double oop_share = 0.0;
    double insured_share = 0.0;

    double sum() const { return public_share + oop_share + insured_share; }
};

/// Rescales a triple whose sum is within 0.02 of unity so it sums to
/// exactly 1. Larger deviations signal corrupt data, not table rounding,
/// and raise DataError.
SharesTriple normalize_shares(const SharesTriple& raw);

struct Provenance {
    std::string source;
    std::string retrieved_at;  // empty for pinned fixtures
};

struct YearRange {
    int first = 0;
    int last = 0;  // inclusive
    int length() const { return last - first + 1; }
};

/// Validated, immutable-after-load collection of aligned series.
///
/// Value-domain invariants (positive currency, fractions in [0,1]) are
/// enforced here at ingestion; derived artifacts such as marginal-growth
/// series may legitimately carry negative values and are not re-admitted.
class Dataset {
public:
    void add_series(AnnualSeries series, SeriesRole role = SeriesRole::None);
    void add_shares(const SharesTriple& raw);

    bool has(const std::string& name) const { return series_.count(name) != 0; }
    const AnnualSeries& at(const std::string& name) const;
    const std::map<std::string, AnnualSeries>& series() const { return series_; }

    const AnnualSeries* by_role(SeriesRole role) const;
    const AnnualSeries& require_role(SeriesRole role) const;
    SeriesRole role_of(const std::string& name) const;

    const std::vector<SharesTriple>& shares() const { return shares_; }
    std::optional<SharesTriple> shares_at(int year) const;

    /// Intersection of the year ranges of the named series; DataError when
    /// the intersection is empty or a series is missing.
    YearRange common_range(std::span<const std::string> names) const;

    Provenance& provenance() { return provenance_; }
    const Provenance& provenance() const { return provenance_; }

private:
    std::map<std::string, AnnualSeries> series_;
    std::map<SeriesRole, std::string> role_index_;
    std::vector<SharesTriple> shares_;
    Provenance provenance_;
};

/// Maps one CSV column onto a named series.
struct SeriesMapping {
    std::string series_name;
    std::string column;
    Unit unit = Unit::CurrencyMillions;
    SeriesRole role = SeriesRole::None;
};

struct ShareColumns {
    std::string public_column;
    std::string oop_column;
    std::string insured_column;
};

/// Column mapping for CSV ingestion. The compact text form is
///   name[=column][:unit[:role]]  entries separated by ','
///   shares=PUBCOL/OOPCOL/INSCOL  for a share triple
/// e.g. "pil_nominale:currency:gdp,spesa_sanitaria:currency:public_health".
struct CsvSchema {
    std::string year_column = "year";
    std::vector<SeriesMapping> series;
    std::optional<ShareColumns> shares;

    static CsvSchema parse(std::string_view text);
    std::string to_text() const;
};

/// Loads a UTF-8 CSV with a header row, a year column and '.' decimal
/// separator. Thousands separators inside quoted cells are stripped.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                 const std::string& source_label = "");
Dataset load_csv_text(std::string_view text, const CsvSchema& schema,
                      const std::string& source_label);

enum class DerivedKind { Phi, PublicPhi, PublicSpend };

/// Derived quantities are computed on demand, never stored:
///   Phi         total health propensity H/Y
///   PublicPhi   public propensity PH/Y (falls back to P*phi from shares)
///   PublicSpend P*H from shares and total health financing
AnnualSeries derive(const Dataset& dataset, DerivedKind kind);

/// Canonical CSV: year column plus every series (name-sorted), share
/// columns last, 17 significant digits. Reloading with canonical_schema()
/// reproduces the dataset bit-for-bit on values.
std::string canonical_csv(const Dataset& dataset);
CsvSchema canonical_schema(const Dataset& dataset);

}  // namespace sustain
