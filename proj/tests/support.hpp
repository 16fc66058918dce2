#pragma once

// Shared test helpers and independent oracles. The oracles deliberately
// avoid the library's formulas: the slope oracle minimizes the SSE by grid
// scan + refinement, the correlation oracle is a plain textbook
// implementation.

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sustain/series.hpp"

namespace testsupport {

inline double oracle_sse(const std::vector<double>& logs, double slope) {
    size_t n = logs.size();
    double tbar = static_cast<double>(n - 1) / 2.0;
    double ybar = 0.0;
    for (double v : logs) ybar += v;
    ybar /= static_cast<double>(n);
    double intercept = ybar - slope * tbar;
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double resid = logs[i] - intercept - slope * static_cast<double>(i);
        sse += resid * resid;
    }
    return sse;
}

// Brute-force least-squares slope on logs: coarse grid then 40 rounds of
// shrinking refinement around the best cell.
inline double brute_force_log_slope(const std::vector<double>& values, double lo = -1.0,
                                    double hi = 1.0) {
    std::vector<double> logs;
    logs.reserve(values.size());
    for (double v : values) logs.push_back(std::log(v));
    double best = lo;
    for (int round = 0; round < 40; ++round) {
        double step = (hi - lo) / 200.0;
        double best_sse = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 200; ++i) {
            double b = lo + step * static_cast<double>(i);
            double sse = oracle_sse(logs, b);
            if (sse < best_sse) {
                best_sse = sse;
                best = b;
            }
        }
        lo = best - step;
        hi = best + step;
    }
    return best;
}

inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    double xbar = 0.0, ybar = 0.0;
    for (size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        syy += (y[i] - ybar) * (y[i] - ybar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline sustain::AnnualSeries make_series(const std::string& name, int start_year,
                                         std::vector<double> values,
                                         sustain::Unit unit = sustain::Unit::CurrencyMillions) {
    sustain::AnnualSeries s;
    s.name = name;
    s.unit = unit;
    s.start_year = start_year;
    s.values = std::move(values);
    return s;
}

// Scratch directory unique to this process, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("sustain-test-" + std::to_string(rd()) + "-" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }
    void write(const std::string& name, const std::string& bytes) const {
        std::ofstream out(file(name), std::ios::binary | std::ios::trunc);
        out << bytes;
    }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
