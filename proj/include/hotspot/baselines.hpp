#pragma once

#include "hotspot/kernel.hpp"
#include "hotspot/predict.hpp"

#include <optional>

namespace hotspot {

struct PhmConfig {
    double tau{7.0};                // days
    double dx{0.25};                // km
    std::optional<double> t_cut{60.0};
    std::optional<double> r_cut{0.4};

    void validate() const;
};

// 1 / ((1 + t/tau)(1 + 2r/dx)), zero beyond the cutoffs.
[[nodiscard]] double phm_weight(double t_days, double r_km, const PhmConfig& cfg);

// The PHM weight on the day mesh: an event during day D - n counts at t = n.
class PhmKernel final : public Kernel {
public:
    explicit PhmKernel(PhmConfig cfg);

    [[nodiscard]] double value(double lag_days, double r_km) const override;
    [[nodiscard]] std::optional<double> max_lag() const override { return cfg_.t_cut; }
    [[nodiscard]] std::optional<double> max_radius() const override { return cfg_.r_cut; }
    [[nodiscard]] std::optional<double> grid_dx() const override { return cfg_.dx; }
    [[nodiscard]] const PhmConfig& config() const noexcept { return cfg_; }

private:
    PhmConfig cfg_;
};

struct KdeConfig {
    double bandwidth{0.35};  // km, standard deviation of the isotropic Gaussian

    void validate() const;
};

// Time-independent sum of Gaussian bells over all training events at cell centers.
[[nodiscard]] IntensityMap kde_intensity(const EventCatalog& catalog, const GridSpec& grid, const KdeConfig& cfg,
                                         double radius_km = kDefaultRadiusKm, int target_day = 0);

} // namespace hotspot
