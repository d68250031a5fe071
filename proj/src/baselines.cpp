#include "hotspot/baselines.hpp"

#include "hotspot/errors.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace hotspot {

void PhmConfig::validate() const {
    if (!(tau > 0.0) || !(dx > 0.0)) {
        throw ConfigError("PHM needs tau > 0 and dx > 0");
    }
    if ((t_cut && !(*t_cut >= 0.0)) || (r_cut && !(*r_cut >= 0.0))) {
        throw ConfigError("PHM cutoffs must be non-negative");
    }
}

double phm_weight(double t_days, double r_km, const PhmConfig& cfg) {
    if ((cfg.t_cut && t_days > *cfg.t_cut) || (cfg.r_cut && r_km > *cfg.r_cut)) {
        return 0.0;
    }
    return 1.0 / ((1.0 + t_days / cfg.tau) * (1.0 + 2.0 * r_km / cfg.dx));
}

PhmKernel::PhmKernel(PhmConfig cfg) : cfg_(cfg) { cfg_.validate(); }

double PhmKernel::value(double lag_days, double r_km) const {
    const double day_lag = std::ceil(lag_days - 1e-9);
    if (day_lag < 0.0) {
        return 0.0;
    }
    return phm_weight(day_lag, r_km, cfg_);
}

void KdeConfig::validate() const {
    if (!(bandwidth > 0.0)) {
        throw ConfigError("KDE bandwidth must be positive");
    }
}

IntensityMap kde_intensity(const EventCatalog& catalog, const GridSpec& grid, const KdeConfig& cfg,
                           double radius_km, int target_day) {
    cfg.validate();
    IntensityMap map(grid, radius_km, target_day, "kde");
    if (catalog.empty()) {
        std::clog << "warning: KDE on an empty catalog gives an all-zero map\n";
        return map;
    }
    const double h2 = cfg.bandwidth * cfg.bandwidth;
    const double norm = 1.0 / (2.0 * std::numbers::pi * h2);
    // Contributions beyond 8 bandwidths are below 1e-14 of the peak.
    const double reach = 8.0 * cfg.bandwidth;
    for (const auto& e : catalog.events) {
        const int i_lo = std::max(0, static_cast<int>(std::floor((e.x - reach - grid.origin_x) / grid.dx)));
        const int i_hi = std::min(grid.nx - 1, static_cast<int>(std::floor((e.x + reach - grid.origin_x) / grid.dx)));
        const int j_lo = std::max(0, static_cast<int>(std::floor((e.y - reach - grid.origin_y) / grid.dx)));
        const int j_hi = std::min(grid.ny - 1, static_cast<int>(std::floor((e.y + reach - grid.origin_y) / grid.dx)));
        for (int j = j_lo; j <= j_hi; ++j) {
            const double dy = grid.center_y(j) - e.y;
            for (int i = i_lo; i <= i_hi; ++i) {
                const double dx = grid.center_x(i) - e.x;
                map.values[static_cast<std::size_t>(j) * grid.nx + i] += norm * std::exp(-(dx * dx + dy * dy) / (2.0 * h2));
            }
        }
    }
    return map;
}

} // namespace hotspot
