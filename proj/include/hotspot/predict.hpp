#pragma once

#include "hotspot/grid.hpp"
#include "hotspot/ingest.hpp"
#include "hotspot/kernel.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hotspot {

// lambda on one day over the spatial grid. Values are events/(km^2 day) for
// kernel methods and ranking scores for the baselines.
struct IntensityMap {
    GridSpec spec;
    std::vector<double> values;   // [j][i]
    std::vector<bool> eligible;   // cell center inside the study disc
    int target_day{0};
    std::string method;

    IntensityMap() = default;
    IntensityMap(const GridSpec& grid, double radius_km, int day, std::string method_name);

    [[nodiscard]] double at(int j, int i) const { return values[static_cast<std::size_t>(j) * spec.nx + i]; }
    [[nodiscard]] std::size_t eligible_count() const;
};

enum class NegativePolicy { Clamp, Keep };

struct PredictConfig {
    std::optional<double> r_cut;        // km
    std::optional<double> horizon_days; // events older than this are ignored
    NegativePolicy negative{NegativePolicy::Clamp};
    double radius_km{kDefaultRadiusKm}; // eligibility disc
    // Background rate; the cascade-only model fixes it at zero.
    static constexpr double lambda0 = 0.0;
};

// lambda(D, x_c) = sum_{t_i < D} g(D - t_i, |x_c - x_i|) for every eligible cell center.
[[nodiscard]] IntensityMap intensity_map(const Kernel& kernel, const EventCatalog& history, int target_day,
                                         const GridSpec& grid, const PredictConfig& cfg = {});

// Intensity for day first_day + n_days - 1 from a history frozen before first_day.
[[nodiscard]] IntensityMap multi_day_map(const Kernel& kernel, const EventCatalog& history, int first_day,
                                         int n_days, const GridSpec& grid, const PredictConfig& cfg = {});

// Sum of the daily intensities over [first_day, first_day + n_days) from a frozen history.
[[nodiscard]] IntensityMap aggregate_map(const Kernel& kernel, const EventCatalog& history, int first_day,
                                         int n_days, const GridSpec& grid, const PredictConfig& cfg = {});

// Eligible cell indices (j * nx + i) by decreasing value, ties by increasing index.
[[nodiscard]] std::vector<std::size_t> rank_cells(const IntensityMap& map);

void write_map_csv(std::ostream& out, const IntensityMap& map);
void write_rank_csv(std::ostream& out, const IntensityMap& map);

} // namespace hotspot
