// Command-line front end: hotspot <subcommand> [--config file] [overrides].
#include "hotspot/errors.hpp"
#include "hotspot/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config;
    std::string out;
    std::string input;
    std::string catalog;
    std::string kernel;
    std::vector<std::string> methods;
    std::optional<int> workers;
    std::optional<int> samples;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> set;  // raw JSON objects merged in order
};

hotspot::RunConfig resolve(const Overrides& o) {
    hotspot::RunConfig cfg = o.config.empty() ? hotspot::RunConfig{} : hotspot::load_config(o.config);
    for (const auto& text : o.set) {
        hotspot::merge_config(cfg, text);
    }
    if (!o.out.empty()) cfg.paths.output_dir = o.out;
    if (!o.input.empty()) cfg.paths.input = o.input;
    if (!o.catalog.empty()) cfg.paths.catalog = o.catalog;
    if (!o.kernel.empty()) cfg.paths.kernel = o.kernel;
    if (!o.methods.empty()) cfg.methods = o.methods;
    if (o.workers) cfg.protocol.workers = *o.workers;
    if (o.samples) cfg.protocol.samples = *o.samples;
    if (o.seed) cfg.simulation.seed = *o.seed;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-exciting point-process hotspot forecasting"};
    app.require_subcommand(1);
    Overrides o;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"ingest", "Parse a raw incident CSV into the canonical catalog"},
        {"simulate", "Simulate a self-exciting catalog with known parameters"},
        {"fit", "Estimate trigger kernels on the first training window"},
        {"predict", "Write the intensity map and cell ranking for the first target day"},
        {"backtest", "Run the rolling backtest and write reports and tables"},
        {"kernel-export", "Write g(t, r=0) series and the log-tail fit"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", o.config, "JSON run configuration");
        sub->add_option("-o,--out", o.out, "Output directory");
        sub->add_option("--input", o.input, "Raw incident CSV");
        sub->add_option("--catalog", o.catalog, "Canonical catalog CSV");
        sub->add_option("--kernel", o.kernel, "Kernel CSV");
        sub->add_option("-m,--method", o.methods, "Method(s): ddgf, em, phm, kde")->delimiter(',');
        sub->add_option("--workers", o.workers, "Parallel backtest samples");
        sub->add_option("--samples", o.samples, "Backtest sample count");
        sub->add_option("--seed", o.seed, "Simulation seed");
        sub->add_option("--set", o.set, "JSON object merged over the config, e.g. '{\"grid\":{\"dx_km\":0.5}}'");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const hotspot::RunConfig cfg = resolve(o);
        const auto result = hotspot::run_command(command, cfg, std::cerr);
        for (const auto& f : result.files) {
            std::cout << cfg.paths.output_dir << '/' << f << '\n';
        }
        return 0;
    } catch (const hotspot::NumericalError& e) {
        std::cerr << "hotspot " << command << ": numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const hotspot::InputError& e) {
        std::cerr << "hotspot " << command << ": input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const hotspot::ConfigError& e) {
        std::cerr << "hotspot " << command << ": config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "hotspot " << command << ": error: " << e.what() << '\n';
        return 1;
    }
}
