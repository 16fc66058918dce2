#include "sustain/cli.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "sustain/gateway.hpp"

using testsupport::TempDir;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = sustain::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string plan_json() {
    return R"({
        "baseline": {"dataset": "oecd2010", "year": 2010},
        "plan": {"dataset": "def2011"},
        "public_share": 0.776
    })";
}

}  // namespace

TEST_CASE("fit prints rate and correlation in table format") {
    CliResult r = run_cli({"fit", "def2011", "pil_nominale"});
    CHECK(r.code == 0);
    CHECK(r.out == "rate=3.18% r=1.00\n");

    CHECK(run_cli({"fit", "def2011", "interessi_passivi"}).out == "rate=8.79% r=1.00\n");
    CHECK(run_cli({"fit", "def2011", "spesa_sanitaria"}).out == "rate=2.83% r=0.98\n");
    CHECK(run_cli({"fit", "def2011", "totale_entrate_finali"}).out == "rate=3.12% r=1.00\n");
}

TEST_CASE("fit failure modes") {
    CHECK(run_cli({"fit", "def2011", "no_such_series"}).code == 1);
    CHECK(run_cli({"fit", "no_such_dataset", "x"}).code == 1);
    CliResult r = run_cli({"fit", "def2011"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("project prints the compounded value") {
    CHECK(run_cli({"project", "7.45", "0.0251", "15"}).out == "10.86\n");
    // the exact value is 20.33; the published table shows 20.34 from an
    // unrounded slope, still inside the 0.01pp acceptance envelope
    CHECK(run_cli({"project", "7.45", "0.0251", "40"}).out == "20.33\n");
    CHECK(run_cli({"project", "5", "0", "7"}).out == "5.00\n");
    CliResult full = run_cli({"project", "7.45", "0.0251", "15", "--precision", "10"});
    CHECK(full.out == "10.85595777\n");
    CHECK(run_cli({"project", "-1", "0.1", "5"}).code == 1);
    CHECK(run_cli({"project", "7.45", "0.0251"}).code == 2);
}

TEST_CASE("sigma subcommand covers the three variants") {
    CliResult dp0 = run_cli({"sigma", "--mode", "dp0", "0.074496", "0.0720737", "1548816",
                             "1593314"});
    CHECK(dp0.code == 0);
    CHECK(dp0.out == "-1.13 ReductionRisk\n");

    CliResult full = run_cli({"sigma", "--mode", "full", "0.708", "0.776", "0.0770", "0.0960",
                              "1048766", "1548816"});
    CHECK(full.out == "0.59 UnsustainableLower\n");

    CliResult dy0 = run_cli({"sigma", "--mode", "dy0", "0.708", "0.776", "0.0745"});
    CHECK(dy0.out == "1.00 UnsustainableLower\n");

    CliResult indet = run_cli({"sigma", "--mode", "dp0", "0.07", "0.08", "1000", "1000"});
    CHECK(indet.code == 0);
    CHECK(indet.out == "indeterminate\n");

    CHECK(run_cli({"sigma", "--mode", "dp0", "1", "2"}).code == 2);
    CHECK(run_cli({"sigma", "--mode", "sideways", "1", "2", "3"}).code == 2);
    CHECK(run_cli({"sigma", "--mode", "dp0", "0", "0.07", "1000", "1100"}).code == 1);
}

TEST_CASE("sigma honors --epsilon and --precision") {
    // with a wide band, -1.13 falls inside the stabilized range
    CliResult wide = run_cli({"sigma", "--mode", "dp0", "0.074496", "0.0720737", "1548816",
                              "1593314", "--epsilon", "0.2"});
    CHECK(wide.out == "-1.13 SpendingStabilized\n");
    CliResult precise = run_cli({"sigma", "--mode", "dp0", "0.074496", "0.0720737", "1548816",
                                 "1593314", "--precision", "9"});
    CHECK(precise.out == "-1.13175992 ReductionRisk\n");
}

TEST_CASE("fit reads CSV paths when given a schema") {
    TempDir tmp;
    tmp.write("gdp.csv",
              "year,PIL\n2010,1548816\n2011,1593314\n2012,1642432\n2013,1696995\n2014,1755013\n");
    CliResult r = run_cli({"fit", tmp.file("gdp.csv").string(), "gdp", "--schema",
                           "gdp=PIL:currency:gdp"});
    CHECK(r.code == 0);
    CHECK(r.out == "rate=3.18% r=1.00\n");
    // a path without a schema is a data error
    CHECK(run_cli({"fit", tmp.file("gdp.csv").string(), "gdp"}).code == 1);
}

TEST_CASE("ingest emits canonical CSV") {
    TempDir tmp;
    tmp.write("raw.csv", "year,PIL\n2010,\"1,548,816\"\n2011,1593314\n");
    CliResult r = run_cli({"ingest", tmp.file("raw.csv").string(), "--schema",
                           "gdp=PIL:currency:gdp", "--no-meta"});
    CHECK(r.code == 0);
    CHECK(r.out == "year,gdp\n2010,1548816\n2011,1593314\n");
    CHECK(r.err.empty());

    SUBCASE("--out writes a file instead of stdout") {
        CliResult w = run_cli({"ingest", tmp.file("raw.csv").string(), "--schema",
                               "gdp=PIL:currency:gdp", "--out", tmp.file("canon.csv").string(),
                               "--no-meta"});
        CHECK(w.code == 0);
        CHECK(w.out.empty());
        std::ifstream in(tmp.file("canon.csv"));
        std::stringstream buf;
        buf << in.rdbuf();
        CHECK(buf.str() == "year,gdp\n2010,1548816\n2011,1593314\n");
    }
    SUBCASE("bad data exits 1, missing schema exits 2") {
        tmp.write("bad.csv", "year,PIL\n2011,5\n2010,6\n");
        CHECK(run_cli({"ingest", tmp.file("bad.csv").string(), "--schema",
                       "gdp=PIL:currency:gdp"})
                  .code == 1);
        CHECK(run_cli({"ingest", tmp.file("raw.csv").string()}).code == 2);
    }
}

TEST_CASE("usage errors exit 2 with help text") {
    CliResult none = run_cli({});
    CHECK(none.code == 2);
    CliResult unknown = run_cli({"frobnicate"});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CliResult help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("ingest") != std::string::npos);
}

TEST_CASE("assess runs end-to-end from a plan spec file") {
    TempDir tmp;
    tmp.write("plan.json", plan_json());
    CliResult table = run_cli({"assess", tmp.file("plan.json").string(), "--no-meta"});
    CHECK(table.code == 0);
    CHECK(table.out.find("-1.13") != std::string::npos);
    CHECK(table.out.find("ReductionRisk") != std::string::npos);
    CHECK(table.out.find("46.64") != std::string::npos);  // coefficient table cell

    SUBCASE("structured output is byte-identical across runs") {
        std::vector<std::string> args{"assess", tmp.file("plan.json").string(), "--format",
                                      "structured", "--no-meta"};
        CliResult first = run_cli(args);
        CliResult second = run_cli(args);
        CHECK(first.code == 0);
        CHECK(first.out == second.out);
        CHECK(first.out.find("\"sustain-report\"") != std::string::npos);
    }
    SUBCASE("csv output carries the coefficient header") {
        CliResult csv = run_cli({"assess", tmp.file("plan.json").string(), "--format", "csv"});
        CHECK(csv.out.find("year,T,P,phi,Pphi,S,residual") != std::string::npos);
    }
    SUBCASE("meta footer appears only without --no-meta") {
        CliResult with_meta = run_cli({"assess", tmp.file("plan.json").string()});
        CHECK(with_meta.out.find("-- plan spec:") != std::string::npos);
        CHECK(table.out.find("-- plan spec:") == std::string::npos);
    }
    SUBCASE("missing plan spec exits 1") {
        CHECK(run_cli({"assess", tmp.file("absent.json").string()}).code == 1);
    }
}

TEST_CASE("stress sweeps from the command line") {
    TempDir tmp;
    tmp.write("plan.json", plan_json());
    CliResult r = run_cli({"stress", tmp.file("plan.json").string(), "--rates",
                           "0.0001,0.0318,0.10"});
    CHECK(r.code == 0);
    CHECK(r.out.find("rate=0.0001") != std::string::npos);
    CHECK(r.out.find("FinancialFiscalRisk") != std::string::npos);
    CHECK(r.out.find("rate=0.1") != std::string::npos);

    CHECK(run_cli({"stress", tmp.file("plan.json").string()}).code == 2);
    CHECK(run_cli({"stress", tmp.file("plan.json").string(), "--rates", "-2"}).code == 1);
}

TEST_CASE("plot writes SVG charts next to their CSV data") {
    TempDir tmp;
    tmp.write("plan.json", plan_json());
    CliResult report = run_cli({"assess", tmp.file("plan.json").string(), "--format",
                                "structured", "--out", tmp.file("report.json").string()});
    REQUIRE(report.code == 0);

    std::string charts_dir = tmp.file("charts").string();
    CliResult plot = run_cli({"plot", tmp.file("report.json").string(), "--out", charts_dir});
    CHECK(plot.code == 0);
    for (const char* name : {"propensity", "sigma", "growth"}) {
        std::filesystem::path svg = tmp.file("charts") / (std::string(name) + ".svg");
        std::filesystem::path csv = tmp.file("charts") / (std::string(name) + ".csv");
        CAPTURE(name);
        REQUIRE(std::filesystem::exists(svg));
        REQUIRE(std::filesystem::exists(csv));
        std::ifstream in(svg);
        std::string head;
        std::getline(in, head);
        CHECK(head.rfind("<svg", 0) == 0);
    }

    SUBCASE("plot output is deterministic") {
        std::string again_dir = tmp.file("charts2").string();
        CliResult plot2 = run_cli({"plot", tmp.file("report.json").string(), "--out", again_dir});
        REQUIRE(plot2.code == 0);
        for (const char* name : {"propensity.svg", "sigma.csv", "growth.svg"}) {
            std::ifstream a(tmp.file("charts") / name), b(tmp.file("charts2") / name);
            std::stringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            CHECK(sa.str() == sb.str());
        }
    }
    SUBCASE("plot CSV columns match the structured report fields") {
        std::ifstream in(tmp.file("charts") / "growth.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "year,average_growth,marginal_growth");
        std::ifstream sin(tmp.file("charts") / "sigma.csv");
        std::getline(sin, header);
        CHECK(header == "period,sigma,variant,band");
        std::ifstream pin(tmp.file("charts") / "propensity.csv");
        std::getline(pin, header);
        CHECK(header == "year,phi,Pphi");
    }
    SUBCASE("garbage report exits 1") {
        tmp.write("junk.json", "{}");
        CHECK(run_cli({"plot", tmp.file("junk.json").string(), "--out", charts_dir}).code == 1);
    }
}
