#include "hotspot/ingest.hpp"
#include "hotspot/kernel.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace hotspot;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = HOTSPOT_FIXTURES;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hotspot_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(HOTSPOT_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string shell_arg(const fs::path& p) { return "'" + p.string() + "'"; }

const char* kSmallBacktest = R"({
  "methods": ["phm"],
  "protocol": {"training_days": 30, "shift_days": 2, "samples": 5, "lead_days": 1}
})";

} // namespace

TEST(Cli, BacktestPhmWritesConsistentReport) {
    const auto dir = scratch("backtest");
    write_file(dir / "cfg.json", kSmallBacktest);
    ASSERT_EQ(run("backtest -c " + shell_arg(dir / "cfg.json") + " --catalog " + shell_arg(kFixtures + "/tiny_catalog.csv") +
                  " -o " + shell_arg(dir / "out")),
              0);
    ASSERT_TRUE(fs::exists(dir / "out" / "report_phm.json"));
    ASSERT_TRUE(fs::exists(dir / "out" / "table.csv"));
    ASSERT_TRUE(fs::exists(dir / "out" / "resolved_config.json"));
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "report_phm.json"));
    const auto& curve = report["mean_curve"];
    ASSERT_FALSE(curve["fraction"].empty());
    for (std::size_t i = 0; i < curve["fraction"].size(); ++i) {
        const double frac = curve["fraction"][i].get<double>();
        const double hit = curve["hit_rate"][i].get<double>();
        const double pai = curve["pai"][i].get<double>();
        if (frac > 0.0) {
            EXPECT_EQ(pai, hit / frac) << "row " << i;
        } else {
            EXPECT_EQ(pai, 0.0);
        }
    }
}

TEST(Cli, FitDdgfGivesOneSeriesPerRadius) {
    const auto dir = scratch("fit");
    write_file(dir / "cfg.json", R"({
      "methods": ["ddgf"],
      "grid": {"radius_km": 2},
      "protocol": {"training_days": 50},
      "ddgf": {"nt_lag": 20},
      "simulation": {"mu": 0.2, "horizon_days": 60, "seed": 3}
    })");
    ASSERT_EQ(run("simulate -c " + shell_arg(dir / "cfg.json") + " -o " + shell_arg(dir / "sim")), 0);
    ASSERT_EQ(run("fit -c " + shell_arg(dir / "cfg.json") + " --catalog " + shell_arg(dir / "sim" / "catalog.csv") + " -o " +
                  shell_arg(dir / "fit")),
              0);
    const TriggerKernel k = load_kernel((dir / "fit" / "kernel_ddgf.csv").string());
    std::map<double, int> rows_per_radius;
    std::ifstream in(dir / "fit" / "kernel_ddgf.csv");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.starts_with("lag_days")) {
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        rows_per_radius[std::stod(line.substr(c1 + 1, c2 - c1 - 1))] += 1;
    }
    ASSERT_EQ(rows_per_radius.size(), k.n_radii());
    for (const auto& [r, count] : rows_per_radius) {
        // lags 0, 1, ..., nt_lag
        EXPECT_EQ(count, 21) << "radius " << r;
    }
    EXPECT_TRUE(fs::exists(dir / "fit" / "phi_ddgf.csv"));
}

TEST(Cli, KernelExportRecoversLogTail) {
    const auto dir = scratch("export");
    TriggerKernel k(KernelShape::Tabulated, "synthetic", 1.0, 0.25, 401, {0.0, 0.125});
    for (std::size_t n = 1; n < k.n_lags(); ++n) {
        const double t = static_cast<double>(n);
        k.at(n, 0) = -0.1 * std::log(0.01 * t);
        k.at(n, 1) = 0.5 * k.at(n, 0);
    }
    save_kernel((dir / "kernel.csv").string(), k);
    ASSERT_EQ(run("kernel-export --kernel " + shell_arg(dir / "kernel.csv") + " -o " + shell_arg(dir / "out")), 0);
    const auto fit = nlohmann::json::parse(slurp(dir / "out" / "kernel_fit_synthetic.json"));
    ASSERT_FALSE(fit["tail_fit"].is_null());
    EXPECT_NEAR(fit["tail_fit"]["a"].get<double>(), 0.1, 0.001);
    EXPECT_NEAR(fit["tail_fit"]["b"].get<double>(), 0.01, 0.0001);
    EXPECT_TRUE(fs::exists(dir / "out" / "kernel_series_synthetic.csv"));
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    write_file(dir / "bad.json", R"({"grid": {"cell_size": 1}})");
    EXPECT_EQ(run("fit -c " + shell_arg(dir / "bad.json")), 2);
    EXPECT_EQ(run("fit -c " + shell_arg(dir / "missing.json")), 2);
    EXPECT_EQ(run("backtest --catalog " + shell_arg(dir / "nope.csv") + " -o " + shell_arg(dir / "o1")), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    // Training window entirely after the data.
    write_file(dir / "late.json", R"({"methods": ["em"], "protocol": {"start": "2015-01-01", "training_days": 30}})");
    EXPECT_EQ(run("fit -c " + shell_arg(dir / "late.json") + " --catalog " + shell_arg(kFixtures + "/tiny_catalog.csv") +
                  " -o " + shell_arg(dir / "o2")),
              3);
}

TEST(Cli, ResolvedConfigReproducesOutputs) {
    const auto dir = scratch("echo");
    write_file(dir / "cfg.json", kSmallBacktest);
    ASSERT_EQ(run("backtest -c " + shell_arg(dir / "cfg.json") + " -m phm,kde --catalog " +
                  shell_arg(kFixtures + "/tiny_catalog.csv") + " -o " + shell_arg(dir / "a")),
              0);
    // The echo names output dir "a"; redirect only that.
    ASSERT_EQ(run("backtest -c " + shell_arg(dir / "a" / "resolved_config.json") + " -o " + shell_arg(dir / "b")), 0);
    for (const char* f : {"report_phm.json", "report_kde.json", "table.csv", "curves.csv"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
}

TEST(Cli, SimulateIsSeedDeterministic) {
    const auto dir = scratch("sim");
    const std::string common = R"( --set '{"simulation": {"mu": 0.05, "horizon_days": 50}}')";
    ASSERT_EQ(run("simulate --seed 9 -o " + shell_arg(dir / "a") + common), 0);
    ASSERT_EQ(run("simulate --seed 9 -o " + shell_arg(dir / "b") + common), 0);
    EXPECT_EQ(slurp(dir / "a" / "catalog.csv"), slurp(dir / "b" / "catalog.csv"));
    const auto side = nlohmann::json::parse(slurp(dir / "a" / "simulation.json"));
    EXPECT_EQ(side["seed"].get<int>(), 9);
}

TEST(Cli, IngestRawIncidents) {
    const auto dir = scratch("ingest");
    write_file(dir / "cfg.json", R"({
      "ingest": {
        "columns": {"date": "Date", "latitude": "Latitude", "longitude": "Longitude", "kind": "Primary Type"},
        "date_format": "%m/%d/%Y %I:%M:%S %p",
        "kinds": [],
        "start": "2010-05-05"
      }
    })");
    ASSERT_EQ(run("ingest -c " + shell_arg(dir / "cfg.json") + " --input " + shell_arg(kFixtures + "/raw_incidents.csv") +
                  " -o " + shell_arg(dir / "out")),
              0);
    const auto summary = nlohmann::json::parse(slurp(dir / "out" / "ingest_summary.json"));
    EXPECT_GE(summary["rows_skipped"].get<int>(), 1);
    const EventCatalog cat = load_catalog((dir / "out" / "catalog.csv").string());
    EXPECT_EQ(cat.size(), summary["events_kept"].get<std::size_t>());
    for (const auto& e : cat.events) {
        EXPECT_LE(std::hypot(e.x, e.y), 5.0);
    }
}
