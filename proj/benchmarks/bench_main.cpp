#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "sustain/gateway.hpp"
#include "sustain/growth.hpp"
#include "sustain/scenario.hpp"
#include "sustain/sustainability.hpp"

namespace {

sustain::AnnualSeries synthetic_series(int n) {
    sustain::AnnualSeries s;
    s.name = "synthetic";
    s.start_year = 1960;
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> wiggle(-0.02, 0.02);
    double v = 1000.0;
    for (int i = 0; i < n; ++i) {
        v *= std::exp(0.03 + wiggle(rng));
        s.values.push_back(v);
    }
    return s;
}

sustain::PlanSpec def_plan() {
    sustain::PlanSpec spec;
    spec.baseline = sustain::load_fixture("oecd2010");
    spec.baseline_year = 2010;
    spec.plan = sustain::load_fixture("def2011");
    spec.public_share = sustain::PublicSharePath::constant_share(0.776);
    return spec;
}

void BM_FitLogGrowth(benchmark::State& state) {
    sustain::AnnualSeries s = synthetic_series(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sustain::fit_log_growth(s));
}
BENCHMARK(BM_FitLogGrowth)->Arg(8)->Arg(64)->Arg(512);

void BM_SigmaFull(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sustain::sigma_full(0.708, 0.776, 0.0770, 0.0960, 1048766.0, 1548816.0));
    }
}
BENCHMARK(BM_SigmaFull);

void BM_LoadFixtureCsv(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(sustain::load_fixture("def2011"));
}
BENCHMARK(BM_LoadFixtureCsv);

void BM_Assess(benchmark::State& state) {
    sustain::PlanSpec spec = def_plan();
    for (auto _ : state) benchmark::DoNotOptimize(sustain::assess(spec));
}
BENCHMARK(BM_Assess);

void BM_StressSweep(benchmark::State& state) {
    sustain::PlanSpec spec = def_plan();
    std::vector<double> grid;
    for (int i = 1; i <= state.range(0); ++i) grid.push_back(0.001 * i);
    for (auto _ : state) benchmark::DoNotOptimize(sustain::stress_gdp(spec, grid));
}
BENCHMARK(BM_StressSweep)->Arg(10)->Arg(100);

void BM_RenderStructured(benchmark::State& state) {
    sustain::AssessmentReport report = sustain::assess(def_plan());
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sustain::render_report(report, sustain::ReportFormat::Structured));
}
BENCHMARK(BM_RenderStructured);

}  // namespace

BENCHMARK_MAIN();
