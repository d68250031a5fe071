#include "hotspot/evaluate.hpp"

#include "hotspot/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <future>
#include <ostream>

namespace hotspot {

namespace {

class KernelMethod : public ForecastMethod {
public:
    explicit KernelMethod(PredictConfig predict) : predict_(predict) {}

    IntensityMap forecast(const EventCatalog& training, int training_days, int lead_days, LeadMode mode,
                          const GridSpec& grid, double radius_km) const override {
        const auto kernel = fit(training, training_days, grid, radius_km);
        PredictConfig cfg = predict_;
        cfg.radius_km = radius_km;
        IntensityMap map = mode == LeadMode::SingleDay
                               ? multi_day_map(*kernel, training, training_days, lead_days, grid, cfg)
                               : aggregate_map(*kernel, training, training_days, lead_days, grid, cfg);
        map.method = name();
        return map;
    }

protected:
    [[nodiscard]] virtual std::unique_ptr<Kernel> fit(const EventCatalog& training, int training_days,
                                                      const GridSpec& grid, double radius_km) const = 0;

private:
    PredictConfig predict_;
};

class DdgfMethod final : public KernelMethod {
public:
    DdgfMethod(DdgfConfig cfg, PredictConfig predict) : KernelMethod(predict), cfg_(std::move(cfg)) {}
    std::string name() const override { return "ddgf"; }

protected:
    std::unique_ptr<Kernel> fit(const EventCatalog& training, int training_days, const GridSpec& grid,
                                double) const override {
        GridSpec g = grid;
        g.nt = training_days;
        return std::make_unique<TriggerKernel>(fit_ddgf(training, g, cfg_));
    }

private:
    DdgfConfig cfg_;
};

class EmMethod final : public KernelMethod {
public:
    EmMethod(EmConfig cfg, PredictConfig predict, std::optional<double> r_cut)
        : KernelMethod(predict), cfg_(cfg), r_cut_(r_cut) {}
    std::string name() const override { return "em"; }

protected:
    std::unique_ptr<Kernel> fit(const EventCatalog& training, int training_days, const GridSpec&,
                                double radius_km) const override {
        const double area = std::numbers::pi * radius_km * radius_km;
        auto k = std::make_unique<TriggerKernel>(em_kernel(em_fit(training, area, training_days, cfg_)));
        k->r_cut = r_cut_;
        return k;
    }

private:
    EmConfig cfg_;
    std::optional<double> r_cut_;
};

class PhmMethod final : public KernelMethod {
public:
    PhmMethod(PhmConfig cfg, PredictConfig predict) : KernelMethod(predict), cfg_(cfg) {}
    std::string name() const override { return "phm"; }

protected:
    std::unique_ptr<Kernel> fit(const EventCatalog&, int, const GridSpec&, double) const override {
        return std::make_unique<PhmKernel>(cfg_);
    }

private:
    PhmConfig cfg_;
};

class KdeMethod final : public ForecastMethod {
public:
    explicit KdeMethod(KdeConfig cfg) : cfg_(cfg) {}
    std::string name() const override { return "kde"; }

    IntensityMap forecast(const EventCatalog& training, int training_days, int lead_days, LeadMode,
                          const GridSpec& grid, double radius_km) const override {
        // Time-independent: every day of the lead period gets the same map.
        return kde_intensity(training, grid, cfg_, radius_km, training_days + lead_days - 1);
    }

private:
    KdeConfig cfg_;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

std::vector<double> percent_fractions(int last_percent) {
    std::vector<double> f;
    for (int p = 1; p <= last_percent; ++p) {
        f.push_back(p / 100.0);
    }
    return f;
}

HitCurve hit_rate_curve(const IntensityMap& map, const EventCatalog& actual, const std::vector<double>& fractions) {
    if (actual.empty()) {
        throw UndefinedHitRate("undefined hit rate: no events in the target period");
    }
    const auto order = rank_cells(map);
    const std::size_t area = order.size();
    if (area == 0) {
        throw ConfigError("hit rate needs at least one eligible cell");
    }
    std::vector<std::size_t> crimes_in(map.values.size(), 0);
    for (const auto& e : actual.events) {
        if (const auto c = cell_of(e.x, e.y, map.spec)) {
            ++crimes_in[static_cast<std::size_t>(c->j) * map.spec.nx + c->i];
        }
    }
    std::vector<std::size_t> cumulative(area + 1, 0);
    for (std::size_t r = 0; r < area; ++r) {
        cumulative[r + 1] = cumulative[r] + crimes_in[order[r]];
    }

    HitCurve curve;
    curve.n_crimes = actual.size();
    curve.n_eligible = area;
    curve.requested = fractions;
    for (double f : fractions) {
        if (!(f >= 0.0) || f > 1.0) {
            throw ConfigError("area fractions must lie in [0, 1]");
        }
        const auto a = static_cast<std::size_t>(std::lround(f * static_cast<double>(area)));
        const double frac = static_cast<double>(a) / static_cast<double>(area);
        const double hit = static_cast<double>(cumulative[a]) / static_cast<double>(curve.n_crimes);
        curve.fraction.push_back(frac);
        curve.hits.push_back(cumulative[a]);
        curve.hit_rate.push_back(hit);
        curve.pai.push_back(a == 0 ? 0.0 : hit / frac);
    }
    return curve;
}

void Protocol::validate() const {
    if (training_days < 1 || shift_days < 0 || samples < 1 || lead_days < 1) {
        throw ConfigError("protocol needs training_days >= 1, shift_days >= 0, samples >= 1, lead_days >= 1");
    }
    if (summary_percent < 1 || summary_percent > 100) {
        throw ConfigError("protocol summary_percent must be in 1..100");
    }
    if (fractions.empty()) {
        throw ConfigError("protocol needs at least one area fraction");
    }
    if (workers < 1) {
        throw ConfigError("protocol workers must be >= 1");
    }
}

std::unique_ptr<ForecastMethod> make_method(const std::string& name, const MethodSettings& s) {
    if (name == "ddgf") {
        return std::make_unique<DdgfMethod>(s.ddgf, s.predict);
    }
    if (name == "em") {
        return std::make_unique<EmMethod>(s.em, s.predict, s.predict.r_cut);
    }
    if (name == "phm") {
        return std::make_unique<PhmMethod>(s.phm, s.predict);
    }
    if (name == "kde") {
        return std::make_unique<KdeMethod>(s.kde);
    }
    throw ConfigError("unknown method '" + name + "' (expected ddgf, em, phm or kde)");
}

BacktestReport backtest(const EventCatalog& dataset, const ForecastMethod& method, const Protocol& protocol,
                        const GridSettings& gs) {
    protocol.validate();
    const int start_day = static_cast<int>((protocol.start - dataset.epoch).count());
    if (start_day < 0) {
        throw ConfigError("protocol starts before the dataset epoch");
    }
    const int last_needed = start_day + protocol.shift_days * (protocol.samples - 1) + protocol.training_days +
                            protocol.lead_days;
    const double span = dataset.empty() ? 0.0 : std::ceil(dataset.events.back().time + 1e-12);
    if (static_cast<double>(last_needed) > span) {
        throw ConfigError("protocol needs " + std::to_string(last_needed) + " days of data but the dataset spans " +
                          format_double(span));
    }
    const GridSpec grid = GridSpec::for_disc(gs.radius_km, gs.dx, gs.dt, protocol.training_days);

    auto run_sample = [&](int s) {
        SampleResult r;
        r.index = s;
        const int ws = start_day + protocol.shift_days * s;
        const int we = ws + protocol.training_days;
        r.window_start = dataset.epoch + std::chrono::days{ws};
        r.window_end = dataset.epoch + std::chrono::days{we - 1};
        r.target = dataset.epoch + std::chrono::days{we + protocol.lead_days - 1};
        const EventCatalog training = window(dataset, ws, we);
        r.training_events = training.size();
        const int score_from = protocol.lead_mode == LeadMode::SingleDay ? we + protocol.lead_days - 1 : we;
        const EventCatalog actual = window(dataset, score_from, we + protocol.lead_days);
        r.crimes = actual.size();
        if (training.empty()) {
            r.skipped = "no training events";
            return r;
        }
        if (actual.empty()) {
            r.skipped = "no events in the target period";
            return r;
        }
        const IntensityMap map = method.forecast(training, protocol.training_days, protocol.lead_days,
                                                 protocol.lead_mode, grid, gs.radius_km);
        // actual was re-epoched to score_from; the map lives in window coordinates
        // but scoring only uses positions.
        r.curve = hit_rate_curve(map, actual, protocol.fractions);
        return r;
    };

    BacktestReport report;
    report.method = method.name();
    report.protocol = protocol;
    report.dx = gs.dx;
    report.radius_km = gs.radius_km;
    report.samples.resize(static_cast<std::size_t>(protocol.samples));
    if (protocol.workers <= 1) {
        for (int s = 0; s < protocol.samples; ++s) {
            report.samples[static_cast<std::size_t>(s)] = run_sample(s);
        }
    } else {
        for (int first = 0; first < protocol.samples; first += protocol.workers) {
            std::vector<std::future<SampleResult>> batch;
            for (int s = first; s < std::min(protocol.samples, first + protocol.workers); ++s) {
                batch.push_back(std::async(std::launch::async, run_sample, s));
            }
            for (std::size_t q = 0; q < batch.size(); ++q) {
                report.samples[static_cast<std::size_t>(first) + q] = batch[q].get();
            }
        }
    }

    const std::size_t nf = protocol.fractions.size();
    HitCurve& mean = report.mean_curve;
    mean.requested = protocol.fractions;
    mean.fraction.assign(nf, 0.0);
    mean.hit_rate.assign(nf, 0.0);
    mean.pai.assign(nf, 0.0);
    mean.hits.assign(nf, 0);
    for (const auto& s : report.samples) {
        if (!s.curve) {
            continue;
        }
        ++report.scored;
        mean.n_crimes += s.curve->n_crimes;
        mean.n_eligible = s.curve->n_eligible;
        mean.fraction = s.curve->fraction;
        for (std::size_t q = 0; q < nf; ++q) {
            mean.hit_rate[q] += s.curve->hit_rate[q];
            mean.hits[q] += s.curve->hits[q];
        }
    }
    if (report.scored > 0) {
        const auto n = static_cast<double>(report.scored);
        for (std::size_t q = 0; q < nf; ++q) {
            if (protocol.averaging == Averaging::Pooled) {
                mean.hit_rate[q] = static_cast<double>(mean.hits[q]) / static_cast<double>(mean.n_crimes);
            } else {
                mean.hit_rate[q] /= n;
            }
            // Every sample shares the grid, so a/A is common and the mean PAI is the
            // mean hit rate over a/A.
            mean.pai[q] = mean.fraction[q] > 0.0 ? mean.hit_rate[q] / mean.fraction[q] : 0.0;
        }
    }
    const TableRow row = summarize(report);
    report.mean_hit = row.hit_percent / 100.0;
    report.mean_pai = row.pai;
    return report;
}

TableRow summarize(const BacktestReport& report) {
    std::vector<double> hit;
    std::vector<double> pai;
    const auto& c = report.mean_curve;
    for (std::size_t q = 0; q < c.requested.size() && q < c.hit_rate.size(); ++q) {
        const long p = std::lround(c.requested[q] * 100.0);
        if (p >= 1 && p <= report.protocol.summary_percent && std::abs(c.requested[q] * 100.0 - p) < 1e-9) {
            hit.push_back(c.hit_rate[q]);
            pai.push_back(c.pai[q]);
        }
    }
    return {report.method, 100.0 * mean_of(hit), mean_of(pai)};
}

void write_report_json(std::ostream& out, const BacktestReport& report) {
    using nlohmann::json;
    auto curve_json = [](const HitCurve& c) {
        return json{{"requested", c.requested}, {"fraction", c.fraction}, {"hit_rate", c.hit_rate},
                    {"pai", c.pai},             {"hits", c.hits},         {"n_crimes", c.n_crimes},
                    {"n_eligible", c.n_eligible}};
    };
    const auto& p = report.protocol;
    json j;
    j["method"] = report.method;
    j["protocol"] = {{"start", format_date(p.start)},
                     {"training_days", p.training_days},
                     {"shift_days", p.shift_days},
                     {"samples", p.samples},
                     {"lead_days", p.lead_days},
                     {"lead_mode", p.lead_mode == LeadMode::SingleDay ? "single_day" : "aggregate"},
                     {"averaging", p.averaging == Averaging::SampleMean ? "sample_mean" : "pooled"},
                     {"summary_percent", p.summary_percent}};
    j["dx_km"] = report.dx;
    j["radius_km"] = report.radius_km;
    j["scored_samples"] = report.scored;
    j["mean_hit_percent"] = 100.0 * report.mean_hit;
    j["mean_pai"] = report.mean_pai;
    j["mean_curve"] = curve_json(report.mean_curve);
    json samples = json::array();
    for (const auto& s : report.samples) {
        json js{{"index", s.index},
                {"window_start", format_date(s.window_start)},
                {"window_end", format_date(s.window_end)},
                {"target", format_date(s.target)},
                {"training_events", s.training_events},
                {"crimes", s.crimes}};
        if (s.curve) {
            js["curve"] = curve_json(*s.curve);
        } else {
            js["skipped"] = s.skipped;
        }
        samples.push_back(std::move(js));
    }
    j["samples"] = std::move(samples);
    out << j.dump(2) << '\n';
}

void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows) {
    out << "method,hit_rate_percent,pai\n";
    for (const auto& r : rows) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s,%.1f,%.2f\n", r.method.c_str(), r.hit_percent, r.pai);
        out << buf;
    }
}

void write_curves_csv(std::ostream& out, const std::vector<BacktestReport>& reports) {
    out << "method,area_fraction,hit_rate,pai\n";
    for (const auto& r : reports) {
        const auto& c = r.mean_curve;
        for (std::size_t q = 0; q < c.fraction.size(); ++q) {
            out << r.method << ',' << format_double(c.fraction[q]) << ',' << format_double(c.hit_rate[q]) << ','
                << format_double(c.pai[q]) << '\n';
        }
    }
}

} // namespace hotspot
