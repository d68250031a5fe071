#include "hotspot/simulate.hpp"

#include "hotspot/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace hotspot {

void SimSpec::validate() const {
    if (!(branching_ratio >= 0.0)) {
        throw ConfigError("simulation branching ratio must be >= 0");
    }
    if (branching_ratio >= 1.0) {
        throw ConfigError("simulation branching ratio " + format_double(branching_ratio) +
                          " is supercritical (must be < 1)");
    }
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw ConfigError("simulation mu must be finite and >= 0");
    }
    if (!(omega > 0.0) || !(sigma_km > 0.0)) {
        throw ConfigError("simulation omega and sigma must be positive");
    }
    if (!(radius_km > 0.0) || !(horizon_days > 0.0)) {
        throw ConfigError("simulation radius and horizon must be positive");
    }
    if (generation_cap < 1) {
        throw ConfigError("simulation generation cap must be >= 1");
    }
}

unsigned SimRandom::poisson(double mean) {
    const double limit = std::exp(-mean);
    unsigned k = 0;
    double p = uniform();
    while (p > limit) {
        ++k;
        p *= uniform();
    }
    return k;
}

std::pair<double, double> SimRandom::normal_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

SimulationResult simulate_detailed(const SimSpec& spec) {
    spec.validate();
    SimRandom rng(spec.seed);
    SimulationResult result;

    struct Node {
        double t, x, y;
        int generation;
    };
    std::vector<Node> nodes;

    const double area = std::numbers::pi * spec.radius_km * spec.radius_km;
    const double rate = spec.mu * area;
    if (rate > 0.0) {
        double t = rng.exponential(rate);
        while (t < spec.horizon_days) {
            const double r = spec.radius_km * std::sqrt(rng.uniform());
            const double a = 2.0 * std::numbers::pi * rng.uniform();
            nodes.push_back({t, r * std::cos(a), r * std::sin(a), 0});
            t += rng.exponential(rate);
        }
    }
    result.background = nodes.size();

    // Breadth-first over the growing node list; children are appended behind
    // their parents so every node is visited exactly once.
    const double r2 = spec.radius_km * spec.radius_km;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const Node parent = nodes[q];
        if (parent.generation >= spec.generation_cap) {
            result.cap_reached = true;
            continue;
        }
        const unsigned children = rng.poisson(spec.branching_ratio);
        for (unsigned c = 0; c < children; ++c) {
            const double lag = rng.exponential(spec.omega);
            const auto [zx, zy] = rng.normal_pair();
            result.offspring_lags.push_back(lag);
            const Node child{parent.t + lag, parent.x + spec.sigma_km * zx, parent.y + spec.sigma_km * zy,
                             parent.generation + 1};
            if (child.t >= spec.horizon_days || child.x * child.x + child.y * child.y > r2) {
                continue;
            }
            nodes.push_back(child);
            result.max_generation = std::max(result.max_generation, child.generation);
        }
    }
    result.offspring = nodes.size() - result.background;

    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.t < b.t; });
    EventCatalog& cat = result.catalog;
    cat.epoch = spec.epoch;
    cat.center = spec.center;
    cat.radius_km = spec.radius_km;
    cat.events.reserve(nodes.size());
    for (const auto& n : nodes) {
        const GeoPoint g = unproject({n.x, n.y}, spec.center);
        cat.events.push_back({n.t, g.lat, g.lon, n.x, n.y, "SIMULATED"});
    }
    return result;
}

EventCatalog simulate(const SimSpec& spec) { return simulate_detailed(spec).catalog; }

double mu_for_expected_events(double expected_events, double radius_km, double horizon_days,
                              double branching_ratio) {
    if (!(radius_km > 0.0) || !(horizon_days > 0.0) || !(branching_ratio >= 0.0) || branching_ratio >= 1.0) {
        throw ConfigError("mu_for_expected_events needs a positive disc and horizon and 0 <= n < 1");
    }
    return expected_events * (1.0 - branching_ratio) / (std::numbers::pi * radius_km * radius_km * horizon_days);
}

void write_simulation_json(std::ostream& out, const SimSpec& spec, const SimulationResult& result) {
    nlohmann::json j;
    j["mu"] = spec.mu;
    j["branching_ratio"] = spec.branching_ratio;
    j["omega"] = spec.omega;
    j["sigma_km"] = spec.sigma_km;
    j["radius_km"] = spec.radius_km;
    j["horizon_days"] = spec.horizon_days;
    j["seed"] = spec.seed;
    j["rng"] = kSimulationRng;
    j["epoch"] = format_date(spec.epoch);
    j["center"] = {spec.center.lat, spec.center.lon};
    j["events"] = result.catalog.size();
    j["background_events"] = result.background;
    j["offspring_events"] = result.offspring;
    j["max_generation"] = result.max_generation;
    j["generation_cap_reached"] = result.cap_reached;
    out << j.dump(2) << '\n';
}

} // namespace hotspot
