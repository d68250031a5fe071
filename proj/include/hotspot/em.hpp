#pragma once

#include "hotspot/ingest.hpp"
#include "hotspot/kernel.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace hotspot {

struct EmConfig {
    int iterations{50};
    double dt{1.0};       // time bin width, days
    double t_max{100.0};  // days
    double dx{0.25};      // radial bin width, km
    double r_max{2.0};    // km
    double omega0{0.5};   // initial temporal decay rate, 1/day

    void validate() const;
    [[nodiscard]] std::size_t time_bins() const;
    [[nodiscard]] std::size_t radial_bins() const;
};

struct EmParameters {
    double mu{0.0};          // events / (km^2 day)
    std::vector<double> g;   // [time bin][radial bin], 1/(day km^2)
};

struct EmModel {
    TriggerKernel kernel;           // histogram form
    double mu{0.0};
    std::vector<double> loglik;     // L(theta_k), k = 0..iterations
    std::size_t pair_count{0};      // (parent, child) candidates inside the kernel support
    double branching_mass{0.0};     // sum_ij p_ij / N after the last E step
};

struct Responsibility {
    std::size_t parent{0};
    std::size_t child{0};
    double p{0.0};
};

// One E step followed by one M step, with the responsibilities that drove it.
struct EmStep {
    EmParameters next;
    std::vector<double> background;           // p_j0 per event
    std::vector<Responsibility> triggered;    // p_ij for every in-support pair
    double loglik{0.0};                       // at the input parameters
};

// exp(-omega0 t) temporal decay, uniform over the r_max disc, unit space-time integral.
[[nodiscard]] EmParameters em_initial(std::size_t n_events, double area_km2, double horizon_days,
                                      const EmConfig& cfg);

[[nodiscard]] EmStep em_step(const EventCatalog& catalog, double area_km2, double horizon_days,
                             const EmConfig& cfg, const EmParameters& current);

// Runs exactly cfg.iterations E/M pairs. The recorded log-likelihood uses the same
// compensator the M step maximizes: mu S T + N * sum_b g_b V_b.
[[nodiscard]] EmModel em_fit(const EventCatalog& catalog, double area_km2, double horizon_days,
                             const EmConfig& cfg = {});

[[nodiscard]] TriggerKernel em_kernel(const EmModel& model);

// Histogram integrated over space: h(t_n) = sum_m g(t_n, r_m) * annulus area.
[[nodiscard]] std::vector<double> temporal_marginal(const TriggerKernel& histogram);

// Slope of a least-squares line through log h(t) for the first max_bins bins with h > 0,
// evaluated at bin centers; returns the decay rate (positive for decay).
[[nodiscard]] double fitted_decay_rate(const TriggerKernel& histogram, std::size_t max_bins);

void write_em_model_json(std::ostream& out, const EmModel& model);

} // namespace hotspot
