#include "hotspot/predict.hpp"

#include "hotspot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace hotspot {

IntensityMap::IntensityMap(const GridSpec& grid, double radius_km, int day, std::string method_name)
    : spec(grid),
      values(grid.cells(), 0.0),
      eligible(disc_mask(grid, radius_km)),
      target_day(day),
      method(std::move(method_name)) {}

std::size_t IntensityMap::eligible_count() const {
    return static_cast<std::size_t>(std::count(eligible.begin(), eligible.end(), true));
}

IntensityMap intensity_map(const Kernel& kernel, const EventCatalog& history, int target_day, const GridSpec& grid,
                           const PredictConfig& cfg) {
    if (const auto kdx = kernel.grid_dx(); kdx && std::abs(*kdx - grid.dx) > 1e-12 * grid.dx) {
        throw ConfigError("kernel was built for dx = " + format_double(*kdx) + " km but the grid uses dx = " +
                          format_double(grid.dx) + " km");
    }
    IntensityMap map(grid, cfg.radius_km, target_day, "");
    double max_lag = kernel.max_lag().value_or(std::numeric_limits<double>::infinity());
    if (cfg.horizon_days) {
        max_lag = std::min(max_lag, *cfg.horizon_days);
    }
    double max_r = kernel.max_radius().value_or(std::numeric_limits<double>::infinity());
    if (cfg.r_cut) {
        max_r = std::min(max_r, *cfg.r_cut);
    }
    const bool clamp = cfg.negative == NegativePolicy::Clamp;

    for (const auto& e : history.events) {
        if (!(e.time < target_day)) {
            throw ConfigError("history contains an event at t = " + format_double(e.time) +
                              " that is not before target day " + std::to_string(target_day));
        }
        const double lag = target_day - e.time;
        if (lag > max_lag) {
            continue;
        }
        int i_lo = 0, i_hi = grid.nx - 1, j_lo = 0, j_hi = grid.ny - 1;
        if (std::isfinite(max_r)) {
            i_lo = std::max(0, static_cast<int>(std::floor((e.x - max_r - grid.origin_x) / grid.dx)));
            i_hi = std::min(grid.nx - 1, static_cast<int>(std::floor((e.x + max_r - grid.origin_x) / grid.dx)));
            j_lo = std::max(0, static_cast<int>(std::floor((e.y - max_r - grid.origin_y) / grid.dx)));
            j_hi = std::min(grid.ny - 1, static_cast<int>(std::floor((e.y + max_r - grid.origin_y) / grid.dx)));
        }
        for (int j = j_lo; j <= j_hi; ++j) {
            for (int i = i_lo; i <= i_hi; ++i) {
                const std::size_t c = static_cast<std::size_t>(j) * grid.nx + i;
                if (!map.eligible[c]) {
                    continue;
                }
                const double r = std::hypot(grid.center_x(i) - e.x, grid.center_y(j) - e.y);
                if (r > max_r) {
                    continue;
                }
                double v = kernel.value(lag, r);
                if (clamp && v < 0.0) {
                    v = 0.0;
                }
                map.values[c] += v;
            }
        }
    }
    return map;
}

IntensityMap multi_day_map(const Kernel& kernel, const EventCatalog& history, int first_day, int n_days,
                           const GridSpec& grid, const PredictConfig& cfg) {
    if (n_days < 1) {
        throw ConfigError("multi-day prediction needs n_days >= 1");
    }
    for (const auto& e : history.events) {
        if (!(e.time < first_day)) {
            throw ConfigError("history must end before the first predicted day");
        }
    }
    return intensity_map(kernel, history, first_day + n_days - 1, grid, cfg);
}

IntensityMap aggregate_map(const Kernel& kernel, const EventCatalog& history, int first_day, int n_days,
                           const GridSpec& grid, const PredictConfig& cfg) {
    if (n_days < 1) {
        throw ConfigError("multi-day prediction needs n_days >= 1");
    }
    IntensityMap total = intensity_map(kernel, history, first_day, grid, cfg);
    for (int d = 1; d < n_days; ++d) {
        const IntensityMap day = intensity_map(kernel, history, first_day + d, grid, cfg);
        for (std::size_t c = 0; c < total.values.size(); ++c) {
            total.values[c] += day.values[c];
        }
    }
    total.target_day = first_day + n_days - 1;
    return total;
}

std::vector<std::size_t> rank_cells(const IntensityMap& map) {
    std::vector<std::size_t> idx;
    idx.reserve(map.values.size());
    for (std::size_t c = 0; c < map.values.size(); ++c) {
        if (map.eligible[c]) {
            idx.push_back(c);
        }
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return map.values[a] > map.values[b]; });
    return idx;
}

void write_map_csv(std::ostream& out, const IntensityMap& map) {
    out << "j,i,x_km,y_km,value\n";
    for (int j = 0; j < map.spec.ny; ++j) {
        for (int i = 0; i < map.spec.nx; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * map.spec.nx + i;
            if (!map.eligible[c]) {
                continue;
            }
            out << j << ',' << i << ',' << format_double(map.spec.center_x(i)) << ','
                << format_double(map.spec.center_y(j)) << ',' << format_double(map.values[c]) << '\n';
        }
    }
}

void write_rank_csv(std::ostream& out, const IntensityMap& map) {
    out << "rank,j,i,value\n";
    const auto order = rank_cells(map);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto c = order[r];
        out << r + 1 << ',' << c / static_cast<std::size_t>(map.spec.nx) << ','
            << c % static_cast<std::size_t>(map.spec.nx) << ',' << format_double(map.values[c]) << '\n';
    }
}

} // namespace hotspot
