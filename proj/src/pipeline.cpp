#include "hotspot/pipeline.hpp"

#include "hotspot/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

namespace hotspot {

namespace fs = std::filesystem;

namespace {

class OutputDir {
public:
    explicit OutputDir(const RunConfig& cfg) : root_(cfg.paths.output_dir) {
        if (root_.empty()) {
            throw ConfigError("paths.output_dir must not be empty");
        }
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec) {
            throw InputError("cannot create output directory '" + root_.string() + "': " + ec.message());
        }
        std::ofstream out = open("resolved_config.json");
        write_config(out, cfg);
    }

    std::ofstream open(const std::string& name) {
        std::ofstream out(root_ / name, std::ios::binary);
        if (!out) {
            throw InputError("cannot write '" + (root_ / name).string() + "'");
        }
        result_.files.push_back(name);
        return out;
    }

    [[nodiscard]] const fs::path& root() const { return root_; }
    [[nodiscard]] CommandResult result() const { return result_; }

private:
    fs::path root_;
    CommandResult result_;
};

EventCatalog require_catalog(const RunConfig& cfg) {
    if (cfg.paths.catalog.empty()) {
        throw InputError("no catalog given (set paths.catalog or pass --catalog)");
    }
    return load_catalog(cfg.paths.catalog);
}

struct TrainingWindow {
    EventCatalog events;
    GridSpec grid;
    int days{0};
};

// The protocol's first window: the same data sample 0 of a backtest trains on.
TrainingWindow first_window(const EventCatalog& catalog, const RunConfig& cfg) {
    const int start_day = static_cast<int>((cfg.protocol.start - catalog.epoch).count());
    if (start_day < 0) {
        throw ConfigError("protocol.start " + format_date(cfg.protocol.start) + " precedes the catalog epoch " +
                          format_date(catalog.epoch));
    }
    TrainingWindow w;
    w.days = cfg.protocol.training_days;
    w.events = window(catalog, start_day, start_day + w.days);
    if (w.events.empty()) {
        throw NumericalError("empty training window starting " + format_date(cfg.protocol.start));
    }
    w.grid = GridSpec::for_disc(cfg.grid.radius_km, cfg.grid.dx, cfg.grid.dt, w.days);
    return w;
}

double disc_area(const RunConfig& cfg) { return std::numbers::pi * cfg.grid.radius_km * cfg.grid.radius_km; }

TriggerKernel fit_kernel(const std::string& method, const TrainingWindow& w, const RunConfig& cfg) {
    if (method == "ddgf") {
        return fit_ddgf(w.events, w.grid, cfg.settings.ddgf);
    }
    return em_kernel(em_fit(w.events, disc_area(cfg), w.days, cfg.settings.em));
}

} // namespace

CommandResult run_ingest(const RunConfig& cfg, std::ostream& log) {
    if (cfg.paths.input.empty()) {
        throw InputError("no input CSV given (set paths.input or pass --input)");
    }
    CatalogFrame frame;
    frame.epoch = cfg.ingest.start;
    frame.center = cfg.center;
    frame.radius_km = cfg.grid.radius_km;
    const ParseResult parsed = parse_catalog_file(cfg.paths.input, cfg.ingest.columns, frame);
    EventCatalog cat = parsed.catalog;
    if (!cfg.ingest.kinds.empty()) {
        cat = select_kinds(cat, cfg.ingest.kinds);
    }
    const Date start = cfg.ingest.start.value_or(cat.epoch);
    const Date end = cfg.ingest.end.value_or(Date{std::chrono::year{9999} / 1 / 1});
    cat = filter_catalog(cat, cfg.center, cfg.grid.radius_km, start, end);

    OutputDir out(cfg);
    {
        auto f = out.open("catalog.csv");
        write_catalog_csv(f, cat);
    }
    {
        auto f = out.open("ingest_summary.json");
        const nlohmann::json j{{"rows_parsed", parsed.catalog.size()},
                               {"rows_skipped", parsed.skipped},
                               {"events_kept", cat.size()},
                               {"epoch", format_date(cat.epoch)}};
        f << j.dump(2) << '\n';
    }
    log << "ingest: kept " << cat.size() << " of " << parsed.catalog.size() << " events (" << parsed.skipped
        << " malformed rows skipped)\n";
    return out.result();
}

CommandResult run_simulate(const RunConfig& cfg, std::ostream& log) {
    const SimulationResult sim = simulate_detailed(cfg.simulation);
    OutputDir out(cfg);
    {
        auto f = out.open("catalog.csv");
        write_catalog_csv(f, sim.catalog);
    }
    {
        auto f = out.open("simulation.json");
        write_simulation_json(f, cfg.simulation, sim);
    }
    log << "simulate: " << sim.catalog.size() << " events (" << sim.background << " background)\n";
    return out.result();
}

CommandResult run_fit(const RunConfig& cfg, std::ostream& log) {
    const EventCatalog cat = require_catalog(cfg);
    const TrainingWindow w = first_window(cat, cfg);
    OutputDir out(cfg);
    for (const auto& m : cfg.methods) {
        if (m == "ddgf") {
            const DensityField field = rasterize(w.events, w.grid);
            const TransferOperator op = estimate_phi(field, cfg.settings.ddgf);
            const KernelSolution sol = solve_kernel_detailed(op, w.grid, cfg.settings.ddgf);
            auto k = out.open("kernel_ddgf.csv");
            write_kernel_csv(k, sol.kernel);
            auto p = out.open("phi_ddgf.csv");
            write_phi_csv(p, op);
            log << "fit ddgf: " << sol.kernel.n_lags() << " lags x " << sol.kernel.n_radii() << " radii\n";
        } else if (m == "em") {
            const EmModel model = em_fit(w.events, disc_area(cfg), w.days, cfg.settings.em);
            auto k = out.open("kernel_em.csv");
            write_kernel_csv(k, em_kernel(model));
            auto j = out.open("em_model.json");
            write_em_model_json(j, model);
            log << "fit em: mu = " << format_double(model.mu) << ", branching mass "
                << format_double(model.branching_mass) << '\n';
        } else {
            log << "fit " << m << ": fixed formula, nothing to fit\n";
        }
    }
    return out.result();
}

CommandResult run_predict(const RunConfig& cfg, std::ostream& log) {
    const EventCatalog cat = require_catalog(cfg);
    const TrainingWindow w = first_window(cat, cfg);
    if (!cfg.paths.kernel.empty() && cfg.methods.size() != 1) {
        throw ConfigError("paths.kernel needs exactly one method");
    }
    PredictConfig pc = cfg.settings.predict;
    pc.radius_km = cfg.grid.radius_km;
    const int lead = cfg.protocol.lead_days;
    const bool single = cfg.protocol.lead_mode == LeadMode::SingleDay;
    OutputDir out(cfg);
    for (const auto& m : cfg.methods) {
        IntensityMap map;
        if (m == "kde") {
            map = kde_intensity(w.events, w.grid, cfg.settings.kde, cfg.grid.radius_km, w.days + lead - 1);
        } else {
            std::unique_ptr<Kernel> kernel;
            if (m == "phm") {
                kernel = std::make_unique<PhmKernel>(cfg.settings.phm);
            } else if (!cfg.paths.kernel.empty()) {
                kernel = std::make_unique<TriggerKernel>(load_kernel(cfg.paths.kernel));
            } else {
                kernel = std::make_unique<TriggerKernel>(fit_kernel(m, w, cfg));
            }
            map = single ? multi_day_map(*kernel, w.events, w.days, lead, w.grid, pc)
                         : aggregate_map(*kernel, w.events, w.days, lead, w.grid, pc);
            map.method = m;
        }
        auto f = out.open("map_" + m + ".csv");
        write_map_csv(f, map);
        auto r = out.open("rank_" + m + ".csv");
        write_rank_csv(r, map);
        log << "predict " << m << ": target "
            << format_date(cfg.protocol.start + std::chrono::days{w.days + lead - 1}) << '\n';
    }
    return out.result();
}

CommandResult run_backtest(const RunConfig& cfg, std::ostream& log) {
    const EventCatalog cat = require_catalog(cfg);
    MethodSettings settings = cfg.settings;
    settings.predict.radius_km = cfg.grid.radius_km;
    std::vector<BacktestReport> reports;
    std::vector<TableRow> rows;
    for (const auto& m : cfg.methods) {
        const auto method = make_method(m, settings);
        reports.push_back(backtest(cat, *method, cfg.protocol, cfg.grid));
        rows.push_back(summarize(reports.back()));
        std::size_t skipped = reports.back().samples.size() - reports.back().scored;
        log << "backtest " << m << ": hit " << format_double(rows.back().hit_percent) << "%, PAI "
            << format_double(rows.back().pai) << " (" << reports.back().scored << " samples scored, " << skipped
            << " skipped)\n";
    }
    OutputDir out(cfg);
    for (const auto& r : reports) {
        auto f = out.open("report_" + r.method + ".json");
        write_report_json(f, r);
    }
    {
        auto f = out.open("table.csv");
        write_table_csv(f, rows);
    }
    {
        auto f = out.open("curves.csv");
        write_curves_csv(f, reports);
    }
    return out.result();
}

CommandResult run_kernel_export(const RunConfig& cfg, std::ostream& log) {
    std::vector<TriggerKernel> kernels;
    if (!cfg.paths.kernel.empty()) {
        kernels.push_back(load_kernel(cfg.paths.kernel));
    } else {
        const EventCatalog cat = require_catalog(cfg);
        const TrainingWindow w = first_window(cat, cfg);
        for (const auto& m : cfg.methods) {
            if (m == "ddgf" || m == "em") {
                kernels.push_back(fit_kernel(m, w, cfg));
            } else {
                log << "kernel-export " << m << ": no fitted kernel, skipped\n";
            }
        }
    }
    OutputDir out(cfg);
    for (const auto& k : kernels) {
        const std::string name = k.method.empty() ? "kernel" : k.method;
        {
            auto f = out.open("kernel_series_" + name + ".csv");
            f << "lag_days,g_r0\n";
            for (std::size_t n = 0; n < k.n_lags(); ++n) {
                f << format_double(k.lags[n]) << ',' << format_double(k.at(n, 0)) << '\n';
            }
        }
        const KernelDiagnostics d =
            kernel_diagnostics(k, cfg.export_settings.fit_from_days, cfg.export_settings.fit_to_days);
        nlohmann::json j;
        j["method"] = name;
        j["peak_lags_days"] = d.peak_lags;
        j["fit_from_days"] = cfg.export_settings.fit_from_days;
        j["fit_to_days"] = cfg.export_settings.fit_to_days;
        if (d.tail_fit) {
            j["tail_fit"] = {{"a", d.tail_fit->a},
                             {"b", d.tail_fit->b},
                             {"r_squared", d.tail_fit->r_squared},
                             {"points", d.tail_fit->points},
                             {"degenerate", d.tail_fit->degenerate}};
        } else {
            j["tail_fit"] = nullptr;
        }
        auto f = out.open("kernel_fit_" + name + ".json");
        f << j.dump(2) << '\n';
        log << "kernel-export " << name << ": " << d.peak_lags.size() << " peaks";
        if (d.tail_fit && !d.tail_fit->degenerate) {
            log << ", tail fit a = " << format_double(d.tail_fit->a) << " b = " << format_double(d.tail_fit->b)
                << " R2 = " << format_double(d.tail_fit->r_squared);
        }
        log << '\n';
    }
    return out.result();
}

CommandResult run_command(const std::string& name, const RunConfig& cfg, std::ostream& log) {
    if (name == "ingest") {
        return run_ingest(cfg, log);
    }
    if (name == "simulate") {
        return run_simulate(cfg, log);
    }
    if (name == "fit") {
        return run_fit(cfg, log);
    }
    if (name == "predict") {
        return run_predict(cfg, log);
    }
    if (name == "backtest") {
        return run_backtest(cfg, log);
    }
    if (name == "kernel-export") {
        return run_kernel_export(cfg, log);
    }
    throw ConfigError("unknown subcommand '" + name + "'");
}

} // namespace hotspot
