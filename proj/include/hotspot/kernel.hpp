#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hotspot {

// Anything that can be summed over past events to form lambda(t, x).
class Kernel {
public:
    virtual ~Kernel() = default;
    // lag_days > 0 is the continuous time from the event to the start of the target day.
    [[nodiscard]] virtual double value(double lag_days, double r_km) const = 0;
    // Events older than this contribute nothing (nullopt: unbounded).
    [[nodiscard]] virtual std::optional<double> max_lag() const = 0;
    [[nodiscard]] virtual std::optional<double> max_radius() const = 0;
    // Spatial cell size the kernel was built for, if any.
    [[nodiscard]] virtual std::optional<double> grid_dx() const = 0;
};

enum class KernelShape {
    // g sampled at lags n*dt and radii r_m; day-rounded lag lookup, linear in r.
    Tabulated,
    // g constant on [n dt, (n+1) dt) x [m dx, (m+1) dx).
    Histogram,
};

struct TriggerKernel final : Kernel {
    KernelShape shape{KernelShape::Tabulated};
    std::string method;
    double dt{1.0};
    double dx{0.25};
    std::vector<double> lags;   // Tabulated: n*dt. Histogram: left edges.
    std::vector<double> radii;  // Tabulated: sample radii. Histogram: annulus centers.
    std::vector<double> g;      // row-major [lag][radius], 1/(day km^2)
    std::optional<double> t_cut;
    std::optional<double> r_cut;

    TriggerKernel() = default;
    TriggerKernel(KernelShape s, std::string method_name, double dt_days, double dx_km, std::size_t n_lags,
                  std::vector<double> radii_km);

    [[nodiscard]] std::size_t n_lags() const noexcept { return lags.size(); }
    [[nodiscard]] std::size_t n_radii() const noexcept { return radii.size(); }
    [[nodiscard]] double at(std::size_t n, std::size_t m) const { return g[n * radii.size() + m]; }
    double& at(std::size_t n, std::size_t m) { return g[n * radii.size() + m]; }

    // Zeroes table entries outside t_cut / r_cut.
    void apply_cutoffs();
    // Space-time integral of a histogram kernel (sum g * dt * annulus area).
    [[nodiscard]] double histogram_mass() const;

    [[nodiscard]] double value(double lag_days, double r_km) const override;
    [[nodiscard]] std::optional<double> max_lag() const override;
    [[nodiscard]] std::optional<double> max_radius() const override;
    [[nodiscard]] std::optional<double> grid_dx() const override { return dx; }
};

// CSV of (lag_days, r_km, g_value) preceded by '# key=value' metadata lines.
void write_kernel_csv(std::ostream& out, const TriggerKernel& kernel);
[[nodiscard]] TriggerKernel read_kernel_csv(std::istream& in);
void save_kernel(const std::string& path, const TriggerKernel& kernel);
[[nodiscard]] TriggerKernel load_kernel(const std::string& path);

} // namespace hotspot
