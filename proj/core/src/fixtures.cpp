// Pinned statistical snapshots shipped with the library so every analysis
// and the whole test suite run with no network. Checksums are verified on
// each load; see gateway_test for the guard that keeps them in sync.

#include "fixtures.hpp"

namespace sustain::detail {

// 2011-2014 stability-program plan figures plus the 2010 actual, from the
// general-government account table (millions of euro).
constexpr const char* kDef2011Csv =
    "year,pil_nominale,spesa_sanitaria,interessi_passivi,totale_entrate_finali,"
    "totale_spese_correnti,totale_spese_finali\n"
    "2010,1548816,113457,70152,722302,739614,793513\n"
    "2011,1593314,114836,76087,739966,753194,801885\n"
    "2012,1642432,117391,84023,768182,767825,813042\n"
    "2013,1696995,122102,91313,790767,790488,836525\n"
    "2014,1755013,126512,97605,814900,814833,860789\n";

constexpr const char* kDef2011Schema =
    "pil_nominale:currency:gdp,"
    "spesa_sanitaria:currency:public_health,"
    "interessi_passivi:currency:interest,"
    "totale_entrate_finali:currency:revenue,"
    "totale_spese_correnti:currency,"
    "totale_spese_finali:currency";

// OECD-health-data style snapshots: one row per reference year with
// financing aggregates (millions of euro) and the P/O/I share triple.
// The two reference years ship as separate datasets; annual series are
// gap-free by contract, and the years in between are not published here.
constexpr const char* kOecd2010Csv =
    "year,gdp,public_health,oop_health,insured_health,total_health,"
    "share_public,share_oop,share_insured\n"
    "2010,1548816,115381,29143,4163,148686,0.776,0.196,0.028\n";

constexpr const char* kOecd1997Csv =
    "year,gdp,public_health,oop_health,insured_health,total_health,"
    "share_public,share_oop,share_insured\n"
    "1997,1048766,57175,21319,2261,80755,0.708,0.264,0.028\n";

constexpr const char* kOecdSchema =
    "gdp:currency:gdp,"
    "public_health:currency:public_health,"
    "oop_health:currency,"
    "insured_health:currency,"
    "total_health:currency:total_health,"
    "shares=share_public/share_oop/share_insured";

const FixtureEntry kFixtures[] = {
    {"def2011", kDef2011Csv, kDef2011Schema,
     "96d2973822b98398383cebeb46e19b4c89282a72a2633f2015d666c60968c033"},
    {"oecd2010", kOecd2010Csv, kOecdSchema,
     "2ecb5e2c97dbbcd60c957f1ed46ecef33b52308097c82683fad2e614ffcca12f"},
    {"oecd1997", kOecd1997Csv, kOecdSchema,
     "62cea36f0c8372d9dcc6e3be8b1c1195ddcbcfb2f2f2d5fae39a43f1d9e80e3f"},
};

const FixtureEntry* find_fixture_entry(std::string_view name) {
    for (const auto& f : kFixtures)
        if (name == f.name) return &f;
    return nullptr;
}

std::vector<std::string> fixture_entry_names() {
    std::vector<std::string> names;
    for (const auto& f : kFixtures) names.emplace_back(f.name);
    return names;
}

}  // namespace sustain::detail
