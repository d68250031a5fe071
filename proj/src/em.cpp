#include "hotspot/em.hpp"

#include "hotspot/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>

namespace hotspot {

namespace {

// Candidate (parent, child) pairs grouped by child, CSR layout. Memory is
// proportional to the pair count, i.e. O(N^2) at fixed area and horizon.
struct PairTable {
    std::vector<std::size_t> offset;   // size N + 1
    std::vector<std::uint32_t> bin;    // time_bin * radial_bins + radial_bin
    std::vector<std::uint32_t> parent; // filled only when requested
};

PairTable build_pairs(const EventCatalog& catalog, const EmConfig& cfg, bool keep_parents) {
    const auto& ev = catalog.events;
    const std::size_t nr = cfg.radial_bins();
    PairTable table;
    table.offset.assign(ev.size() + 1, 0);
    for (std::size_t j = 0; j < ev.size(); ++j) {
        for (std::size_t i = j; i-- > 0;) {
            const double lag = ev[j].time - ev[i].time;
            if (lag >= cfg.t_max) {
                break;
            }
            if (lag <= 0.0) {
                continue;
            }
            const double r = std::hypot(ev[j].x - ev[i].x, ev[j].y - ev[i].y);
            if (r >= cfg.r_max) {
                continue;
            }
            const auto tb = static_cast<std::size_t>(lag / cfg.dt);
            const auto rb = static_cast<std::size_t>(r / cfg.dx);
            if (tb >= cfg.time_bins() || rb >= nr) {
                continue;
            }
            table.bin.push_back(static_cast<std::uint32_t>(tb * nr + rb));
            if (keep_parents) {
                table.parent.push_back(static_cast<std::uint32_t>(i));
            }
        }
        table.offset[j + 1] = table.bin.size();
    }
    return table;
}

std::vector<double> bin_volumes(const EmConfig& cfg) {
    std::vector<double> v(cfg.time_bins() * cfg.radial_bins());
    for (std::size_t tb = 0; tb < cfg.time_bins(); ++tb) {
        for (std::size_t rb = 0; rb < cfg.radial_bins(); ++rb) {
            v[tb * cfg.radial_bins() + rb] =
                cfg.dt * std::numbers::pi * cfg.dx * cfg.dx * (2.0 * static_cast<double>(rb) + 1.0);
        }
    }
    return v;
}

struct IterationOutput {
    EmParameters next;
    double loglik{0.0};
    double triggered_mass{0.0};
};

IterationOutput iterate(const PairTable& pairs, std::size_t n_events, double st, const std::vector<double>& volumes,
                        const EmParameters& cur, EmStep* record) {
    std::vector<double> accum(cur.g.size(), 0.0);
    double background = 0.0;
    double log_sum = 0.0;
    for (std::size_t j = 0; j < n_events; ++j) {
        double lambda = cur.mu;
        for (std::size_t q = pairs.offset[j]; q < pairs.offset[j + 1]; ++q) {
            lambda += cur.g[pairs.bin[q]];
        }
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw NumericalError("EM E step: conditional intensity vanished at event " + std::to_string(j));
        }
        log_sum += std::log(lambda);
        background += cur.mu / lambda;
        if (record) {
            record->background.push_back(cur.mu / lambda);
        }
        for (std::size_t q = pairs.offset[j]; q < pairs.offset[j + 1]; ++q) {
            const double p = cur.g[pairs.bin[q]] / lambda;
            accum[pairs.bin[q]] += p;
            if (record) {
                record->triggered.push_back({pairs.parent[q], j, p});
            }
        }
    }
    const auto n = static_cast<double>(n_events);
    double compensator = cur.mu * st;
    for (std::size_t b = 0; b < cur.g.size(); ++b) {
        compensator += n * cur.g[b] * volumes[b];
    }

    IterationOutput out;
    out.loglik = log_sum - compensator;
    out.next.mu = background / st;
    out.next.g.resize(cur.g.size());
    for (std::size_t b = 0; b < accum.size(); ++b) {
        out.next.g[b] = accum[b] / (n * volumes[b]);
        out.triggered_mass += accum[b];
    }
    return out;
}

void check_inputs(const EventCatalog& catalog, double area_km2, double horizon_days, const EmConfig& cfg) {
    cfg.validate();
    if (!(horizon_days > 0.0)) {
        throw ConfigError("EM needs a positive horizon (got a zero-duration window)");
    }
    if (!(area_km2 > 0.0)) {
        throw ConfigError("EM needs a positive region area");
    }
    if (catalog.empty()) {
        throw ConfigError("EM needs at least one event");
    }
}

} // namespace

void EmConfig::validate() const {
    if (iterations < 1) {
        throw ConfigError("EM iterations must be >= 1");
    }
    if (!(dt > 0.0) || !(dx > 0.0) || !(t_max > 0.0) || !(r_max > 0.0)) {
        throw ConfigError("EM bin widths and support limits must be positive");
    }
    if (!(omega0 > 0.0)) {
        throw ConfigError("EM omega0 must be positive");
    }
}

std::size_t EmConfig::time_bins() const { return static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9)); }

std::size_t EmConfig::radial_bins() const { return static_cast<std::size_t>(std::ceil(r_max / dx - 1e-9)); }

EmParameters em_initial(std::size_t n_events, double area_km2, double horizon_days, const EmConfig& cfg) {
    cfg.validate();
    EmParameters p;
    p.mu = static_cast<double>(n_events) / (2.0 * area_km2 * horizon_days);
    const double disc = std::numbers::pi * cfg.r_max * cfg.r_max;
    p.g.resize(cfg.time_bins() * cfg.radial_bins());
    for (std::size_t tb = 0; tb < cfg.time_bins(); ++tb) {
        const double lo = static_cast<double>(tb) * cfg.dt;
        const double bin_avg = (std::exp(-cfg.omega0 * lo) - std::exp(-cfg.omega0 * (lo + cfg.dt))) / cfg.dt;
        for (std::size_t rb = 0; rb < cfg.radial_bins(); ++rb) {
            p.g[tb * cfg.radial_bins() + rb] = bin_avg / disc;
        }
    }
    return p;
}

EmStep em_step(const EventCatalog& catalog, double area_km2, double horizon_days, const EmConfig& cfg,
               const EmParameters& current) {
    check_inputs(catalog, area_km2, horizon_days, cfg);
    if (current.g.size() != cfg.time_bins() * cfg.radial_bins()) {
        throw ConfigError("EM parameters do not match the configured histogram");
    }
    const PairTable pairs = build_pairs(catalog, cfg, true);
    EmStep step;
    auto out = iterate(pairs, catalog.size(), area_km2 * horizon_days, bin_volumes(cfg), current, &step);
    step.next = std::move(out.next);
    step.loglik = out.loglik;
    return step;
}

EmModel em_fit(const EventCatalog& catalog, double area_km2, double horizon_days, const EmConfig& cfg) {
    check_inputs(catalog, area_km2, horizon_days, cfg);
    const PairTable pairs = build_pairs(catalog, cfg, false);
    const auto volumes = bin_volumes(cfg);
    const double st = area_km2 * horizon_days;
    EmParameters params = em_initial(catalog.size(), area_km2, horizon_days, cfg);

    EmModel model;
    model.pair_count = pairs.bin.size();
    for (int it = 0; it < cfg.iterations; ++it) {
        auto out = iterate(pairs, catalog.size(), st, volumes, params, nullptr);
        model.loglik.push_back(out.loglik);
        model.branching_mass = out.triggered_mass / static_cast<double>(catalog.size());
        params = std::move(out.next);
    }
    model.loglik.push_back(iterate(pairs, catalog.size(), st, volumes, params, nullptr).loglik);

    std::vector<double> centers(cfg.radial_bins());
    for (std::size_t rb = 0; rb < centers.size(); ++rb) {
        centers[rb] = (static_cast<double>(rb) + 0.5) * cfg.dx;
    }
    model.kernel = TriggerKernel(KernelShape::Histogram, "em", cfg.dt, cfg.dx, cfg.time_bins(), std::move(centers));
    model.kernel.g = std::move(params.g);
    model.mu = params.mu;
    return model;
}

TriggerKernel em_kernel(const EmModel& model) {
    TriggerKernel k = model.kernel;
    k.shape = KernelShape::Histogram;
    return k;
}

std::vector<double> temporal_marginal(const TriggerKernel& h) {
    std::vector<double> out(h.n_lags(), 0.0);
    for (std::size_t n = 0; n < h.n_lags(); ++n) {
        for (std::size_t m = 0; m < h.n_radii(); ++m) {
            out[n] += h.at(n, m) * std::numbers::pi * h.dx * h.dx * (2.0 * static_cast<double>(m) + 1.0);
        }
    }
    return out;
}

double fitted_decay_rate(const TriggerKernel& histogram, std::size_t max_bins) {
    const auto marginal = temporal_marginal(histogram);
    double su = 0.0, sv = 0.0, suu = 0.0, suv = 0.0;
    double n = 0.0;
    for (std::size_t b = 0; b < marginal.size() && b < max_bins; ++b) {
        if (marginal[b] <= 0.0) {
            continue;
        }
        const double t = histogram.lags[b] + 0.5 * histogram.dt;
        const double v = std::log(marginal[b]);
        su += t;
        sv += v;
        suu += t * t;
        suv += t * v;
        n += 1.0;
    }
    if (n < 2.0) {
        return 0.0;
    }
    const double slope = (n * suv - su * sv) / (n * suu - su * su);
    return -slope;
}

void write_em_model_json(std::ostream& out, const EmModel& model) {
    nlohmann::json j;
    j["mu"] = model.mu;
    j["loglik"] = model.loglik;
    j["iterations"] = model.loglik.empty() ? 0 : model.loglik.size() - 1;
    j["pair_count"] = model.pair_count;
    j["branching_mass"] = model.branching_mass;
    j["dt_days"] = model.kernel.dt;
    j["dx_km"] = model.kernel.dx;
    out << j.dump(2) << '\n';
}

} // namespace hotspot
