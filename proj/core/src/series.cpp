#include "sustain/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace sustain {

namespace {

constexpr double kShareSumTolerance = 0.02;

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record. Double quotes protect commas; "" is an escaped
// quote inside a quoted cell.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

// Decimal with '.' separator; ',' thousands separators are stripped.
double parse_number(const std::string& cell, const std::string& context) {
    std::string cleaned;
    cleaned.reserve(cell.size());
    for (char c : cell) {
        if (c == ',') continue;
        cleaned += c;
    }
    if (cleaned.empty()) throw DataError("empty numeric cell in " + context);
    const char* begin = cleaned.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + cleaned.size())
        throw DataError("cannot parse number '" + cell + "' in " + context);
    if (!std::isfinite(v))
        throw DataError("non-finite value '" + cell + "' in " + context);
    return v;
}

int parse_year(const std::string& cell, const std::string& context) {
    double v = parse_number(cell, context);
    int y = static_cast<int>(v);
    if (static_cast<double>(y) != v)
        throw DataError("year '" + cell + "' is not an integer in " + context);
    return y;
}

void check_value_domain(const AnnualSeries& s) {
    for (size_t i = 0; i < s.values.size(); ++i) {
        double v = s.values[i];
        std::string where = s.name + " at year " + std::to_string(s.start_year + static_cast<int>(i));
        if (!std::isfinite(v)) throw DataError("non-finite value in " + where);
        if (s.unit == Unit::CurrencyMillions && v <= 0.0)
            throw DataError("non-positive currency value in " + where);
        if (s.unit == Unit::Fraction && (v < 0.0 || v > 1.0))
            throw DataError("fraction outside [0, 1] in " + where);
    }
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string_view to_string(Unit u) {
    return u == Unit::CurrencyMillions ? "currency" : "fraction";
}

std::string_view to_string(SeriesRole r) {
    switch (r) {
        case SeriesRole::Gdp: return "gdp";
        case SeriesRole::TotalHealth: return "total_health";
        case SeriesRole::PublicHealth: return "public_health";
        case SeriesRole::Revenue: return "revenue";
        case SeriesRole::Interest: return "interest";
        case SeriesRole::None: break;
    }
    return "none";
}

Unit parse_unit(std::string_view s) {
    if (s == "currency" || s == "currency-millions") return Unit::CurrencyMillions;
    if (s == "fraction") return Unit::Fraction;
    throw DataError("unknown unit '" + std::string(s) + "'");
}

SeriesRole parse_role(std::string_view s) {
    if (s == "gdp") return SeriesRole::Gdp;
    if (s == "total_health") return SeriesRole::TotalHealth;
    if (s == "public_health") return SeriesRole::PublicHealth;
    if (s == "revenue") return SeriesRole::Revenue;
    if (s == "interest") return SeriesRole::Interest;
    if (s == "none" || s.empty()) return SeriesRole::None;
    throw DataError("unknown series role '" + std::string(s) + "'");
}

double AnnualSeries::at(int year) const {
    if (!covers(year))
        throw DataError("series " + name + " has no observation for year " + std::to_string(year));
    return values[static_cast<size_t>(year - start_year)];
}

SharesTriple normalize_shares(const SharesTriple& raw) {
    for (double v : {raw.public_share, raw.oop_share, raw.insured_share}) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw DataError("share outside [0, 1] for year " + std::to_string(raw.year));
    }
    double sum = raw.sum();
    if (std::abs(sum - 1.0) > kShareSumTolerance)
        throw DataError("share triple for year " + std::to_string(raw.year) + " sums to " +
                        fmt_full(sum) + ", deviating from 1 by more than 0.02");
    SharesTriple out = raw;
    out.public_share /= sum;
    out.oop_share /= sum;
    out.insured_share /= sum;
    return out;
}

void Dataset::add_series(AnnualSeries series, SeriesRole role) {
    if (series.name.empty()) throw DataError("series without a name");
    if (series.values.empty()) throw DataError("series " + series.name + " has no observations");
    check_value_domain(series);
    if (series_.count(series.name))
        throw DataError("duplicate series '" + series.name + "'");
    if (role != SeriesRole::None) {
        auto [it, inserted] = role_index_.emplace(role, series.name);
        if (!inserted)
            throw DataError("role '" + std::string(to_string(role)) + "' already taken by series '" +
                            it->second + "'");
    }
    series_.emplace(series.name, std::move(series));
}

void Dataset::add_shares(const SharesTriple& raw) {
    SharesTriple n = normalize_shares(raw);
    if (shares_at(n.year))
        throw DataError("duplicate share row for year " + std::to_string(n.year));
    shares_.push_back(n);
    std::sort(shares_.begin(), shares_.end(),
              [](const SharesTriple& a, const SharesTriple& b) { return a.year < b.year; });
}

const AnnualSeries& Dataset::at(const std::string& name) const {
    auto it = series_.find(name);
    if (it == series_.end()) throw DataError("missing series '" + name + "'");
    return it->second;
}

const AnnualSeries* Dataset::by_role(SeriesRole role) const {
    auto it = role_index_.find(role);
    if (it == role_index_.end()) return nullptr;
    return &series_.at(it->second);
}

const AnnualSeries& Dataset::require_role(SeriesRole role) const {
    const AnnualSeries* s = by_role(role);
    if (!s)
        throw DataError("dataset has no series with role '" + std::string(to_string(role)) + "'");
    return *s;
}

SeriesRole Dataset::role_of(const std::string& name) const {
    for (const auto& [role, sname] : role_index_)
        if (sname == name) return role;
    return SeriesRole::None;
}

std::optional<SharesTriple> Dataset::shares_at(int year) const {
    for (const auto& t : shares_)
        if (t.year == year) return t;
    return std::nullopt;
}

YearRange Dataset::common_range(std::span<const std::string> names) const {
    if (names.empty()) throw DataError("common_range over no series");
    int first = std::numeric_limits<int>::min();
    int last = std::numeric_limits<int>::max();
    for (const auto& n : names) {
        const AnnualSeries& s = at(n);
        first = std::max(first, s.start_year);
        last = std::min(last, s.last_year());
    }
    if (first > last) throw DataError("series have no common year range");
    return {first, last};
}

CsvSchema CsvSchema::parse(std::string_view text) {
    CsvSchema schema;
    std::string entry;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, entry, ',')) {
        entry = trim(entry);
        if (entry.empty()) continue;
        std::string lhs = entry, rhs;
        if (auto eq = entry.find('='); eq != std::string::npos) {
            lhs = trim(entry.substr(0, eq));
            rhs = trim(entry.substr(eq + 1));
        }
        if (lhs == "shares") {
            // shares=PUB/OOP/INS
            std::vector<std::string> cols;
            std::stringstream sc{rhs};
            std::string col;
            while (std::getline(sc, col, '/')) cols.push_back(trim(col));
            if (cols.size() != 3)
                throw DataError("shares mapping needs three '/'-separated columns, got '" + rhs + "'");
            schema.shares = ShareColumns{cols[0], cols[1], cols[2]};
            continue;
        }
        if (lhs == "year") {
            schema.year_column = rhs.empty() ? "year" : rhs;
            continue;
        }
        // name[=column][:unit[:role]]; unit and role ride on the column part
        std::vector<std::string> parts;
        std::stringstream sp{rhs.empty() ? lhs : rhs};
        std::string part;
        while (std::getline(sp, part, ':')) parts.push_back(trim(part));
        if (parts.empty() || parts[0].empty())
            throw DataError("empty column in schema entry '" + entry + "'");
        if (parts.size() > 3)
            throw DataError("too many ':' fields in schema entry '" + entry + "'");
        SeriesMapping m;
        m.column = parts[0];
        m.series_name = rhs.empty() ? parts[0] : lhs;
        if (parts.size() > 1 && !parts[1].empty()) m.unit = parse_unit(parts[1]);
        if (parts.size() > 2) m.role = parse_role(parts[2]);
        schema.series.push_back(std::move(m));
    }
    if (schema.series.empty() && !schema.shares)
        throw DataError("schema maps no columns");
    return schema;
}

std::string CsvSchema::to_text() const {
    std::string out;
    auto append = [&out](const std::string& piece) {
        if (!out.empty()) out += ',';
        out += piece;
    };
    if (year_column != "year") append("year=" + year_column);
    for (const auto& m : series) {
        std::string piece = m.series_name;
        if (m.column != m.series_name) piece += "=" + m.column;
        piece += ":" + std::string(to_string(m.unit));
        if (m.role != SeriesRole::None) piece += ":" + std::string(to_string(m.role));
        append(piece);
    }
    if (shares)
        append("shares=" + shares->public_column + "/" + shares->oop_column + "/" +
               shares->insured_column);
    return out;
}

Dataset load_csv_text(std::string_view text, const CsvSchema& schema,
                      const std::string& source_label) {
    std::vector<std::vector<std::string>> rows;
    {
        std::stringstream ss{std::string(text)};
        std::string line;
        while (std::getline(ss, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            rows.push_back(split_csv_line(line));
        }
    }
    if (rows.size() < 2) throw DataError("CSV has no data rows (" + source_label + ")");

    const std::vector<std::string>& header = rows.front();
    auto column_index = [&header](const std::string& col) -> size_t {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == col) return i;
        throw DataError("missing column '" + col + "'");
    };

    size_t year_idx = column_index(schema.year_column);
    struct Bound {
        const SeriesMapping* mapping;
        size_t index;
    };
    std::vector<Bound> bound;
    bound.reserve(schema.series.size());
    for (const auto& m : schema.series) bound.push_back({&m, column_index(m.column)});
    std::optional<std::array<size_t, 3>> share_idx;
    if (schema.shares)
        share_idx = {column_index(schema.shares->public_column),
                     column_index(schema.shares->oop_column),
                     column_index(schema.shares->insured_column)};

    // Collect per-series observations; empty cells mean "not observed".
    struct Building {
        std::vector<std::pair<int, double>> obs;
    };
    std::vector<Building> building(bound.size());
    std::vector<SharesTriple> share_rows;

    int prev_year = std::numeric_limits<int>::min();
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        std::string context = "row " + std::to_string(r + 1);
        if (cells.size() < header.size())
            throw DataError(context + " has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
        int year = parse_year(cells[year_idx], context);
        if (year <= prev_year)
            throw DataError("years not strictly increasing at " + context);
        prev_year = year;
        for (size_t b = 0; b < bound.size(); ++b) {
            const std::string& cell = cells[bound[b].index];
            if (cell.empty()) continue;
            building[b].obs.emplace_back(year, parse_number(cell, context + ", column " +
                                                                      bound[b].mapping->column));
        }
        if (share_idx) {
            const std::string& pc = cells[(*share_idx)[0]];
            const std::string& oc = cells[(*share_idx)[1]];
            const std::string& ic = cells[(*share_idx)[2]];
            if (!pc.empty() || !oc.empty() || !ic.empty()) {
                if (pc.empty() || oc.empty() || ic.empty())
                    throw DataError("incomplete share triple at " + context);
                share_rows.push_back({year, parse_number(pc, context), parse_number(oc, context),
                                      parse_number(ic, context)});
            }
        }
    }

    Dataset ds;
    ds.provenance().source = source_label;
    for (size_t b = 0; b < bound.size(); ++b) {
        const auto& obs = building[b].obs;
        if (obs.empty())
            throw DataError("column '" + bound[b].mapping->column + "' has no values");
        AnnualSeries s;
        s.name = bound[b].mapping->series_name;
        s.unit = bound[b].mapping->unit;
        s.start_year = obs.front().first;
        s.values.reserve(obs.size());
        for (size_t i = 0; i < obs.size(); ++i) {
            if (obs[i].first != s.start_year + static_cast<int>(i))
                throw DataError("series " + s.name + " has a year gap at " +
                                std::to_string(obs[i].first));
            s.values.push_back(obs[i].second);
        }
        ds.add_series(std::move(s), bound[b].mapping->role);
    }
    for (const auto& t : share_rows) ds.add_shares(t);
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                 const std::string& source_label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_csv_text(buf.str(), schema, source_label.empty() ? path.string() : source_label);
}

namespace {

AnnualSeries ratio_series(const Dataset& ds, const AnnualSeries& num, const AnnualSeries& den,
                          const std::string& name) {
    const std::string names[] = {num.name, den.name};
    YearRange range = ds.common_range(names);
    AnnualSeries out;
    out.name = name;
    out.unit = Unit::Fraction;
    out.start_year = range.first;
    out.values.reserve(static_cast<size_t>(range.length()));
    for (int y = range.first; y <= range.last; ++y) out.values.push_back(num.at(y) / den.at(y));
    return out;
}

}  // namespace

AnnualSeries derive(const Dataset& dataset, DerivedKind kind) {
    switch (kind) {
        case DerivedKind::Phi:
            return ratio_series(dataset, dataset.require_role(SeriesRole::TotalHealth),
                                dataset.require_role(SeriesRole::Gdp), "phi");
        case DerivedKind::PublicPhi: {
            if (const AnnualSeries* ph = dataset.by_role(SeriesRole::PublicHealth);
                ph && ph->unit == Unit::CurrencyMillions)
                return ratio_series(dataset, *ph, dataset.require_role(SeriesRole::Gdp),
                                    "public_phi");
            // fall back to P * phi from the share rows
            AnnualSeries phi = derive(dataset, DerivedKind::Phi);
            AnnualSeries out;
            out.name = "public_phi";
            out.unit = Unit::Fraction;
            std::vector<std::pair<int, double>> obs;
            for (int y = phi.start_year; y <= phi.last_year(); ++y) {
                auto t = dataset.shares_at(y);
                if (!t) continue;
                obs.emplace_back(y, t->public_share * phi.at(y));
            }
            if (obs.empty())
                throw DataError("cannot derive public_phi: no public health series and no share rows");
            out.start_year = obs.front().first;
            for (size_t i = 0; i < obs.size(); ++i) {
                if (obs[i].first != out.start_year + static_cast<int>(i))
                    throw DataError("share rows have a year gap at " + std::to_string(obs[i].first));
                out.values.push_back(obs[i].second);
            }
            return out;
        }
        case DerivedKind::PublicSpend: {
            const AnnualSeries& h = dataset.require_role(SeriesRole::TotalHealth);
            AnnualSeries out;
            out.name = "public_spend";
            out.unit = Unit::CurrencyMillions;
            std::vector<std::pair<int, double>> obs;
            for (int y = h.start_year; y <= h.last_year(); ++y) {
                auto t = dataset.shares_at(y);
                if (!t) continue;
                obs.emplace_back(y, t->public_share * h.at(y));
            }
            if (obs.empty()) throw DataError("cannot derive public_spend: no share rows");
            out.start_year = obs.front().first;
            for (size_t i = 0; i < obs.size(); ++i) {
                if (obs[i].first != out.start_year + static_cast<int>(i))
                    throw DataError("share rows have a year gap at " + std::to_string(obs[i].first));
                out.values.push_back(obs[i].second);
            }
            return out;
        }
    }
    throw DataError("unknown derived kind");
}

std::string canonical_csv(const Dataset& dataset) {
    int first = std::numeric_limits<int>::max();
    int last = std::numeric_limits<int>::min();
    for (const auto& [name, s] : dataset.series()) {
        first = std::min(first, s.start_year);
        last = std::max(last, s.last_year());
    }
    for (const auto& t : dataset.shares()) {
        first = std::min(first, t.year);
        last = std::max(last, t.year);
    }
    if (first > last) throw DataError("empty dataset");

    std::string out = "year";
    for (const auto& [name, s] : dataset.series()) out += "," + name;
    bool with_shares = !dataset.shares().empty();
    if (with_shares) out += ",share_public,share_oop,share_insured";
    out += "\n";
    for (int y = first; y <= last; ++y) {
        out += std::to_string(y);
        for (const auto& [name, s] : dataset.series()) {
            out += ",";
            if (s.covers(y)) out += fmt_full(s.at(y));
        }
        if (with_shares) {
            auto t = dataset.shares_at(y);
            if (t)
                out += "," + fmt_full(t->public_share) + "," + fmt_full(t->oop_share) + "," +
                       fmt_full(t->insured_share);
            else
                out += ",,,";
        }
        out += "\n";
    }
    return out;
}

CsvSchema canonical_schema(const Dataset& dataset) {
    CsvSchema schema;
    for (const auto& [name, s] : dataset.series()) {
        SeriesMapping m;
        m.series_name = name;
        m.column = name;
        m.unit = s.unit;
        m.role = dataset.role_of(name);
        schema.series.push_back(std::move(m));
    }
    if (!dataset.shares().empty())
        schema.shares = ShareColumns{"share_public", "share_oop", "share_insured"};
    return schema;
}

}  // namespace sustain
