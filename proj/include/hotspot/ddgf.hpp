#pragma once

#include "hotspot/grid.hpp"
#include "hotspot/kernel.hpp"
#include "hotspot/spectral.hpp"

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

namespace hotspot {

// Stationary-state feedback coefficient: lambda_st = rho_st forces exp(gamma) - 1 = 1.
inline constexpr double kStationaryGamma = std::numbers::ln2;

enum class OriginWeighting {
    PerSlice,  // every eventful t0 slice counts once
    PerEvent,  // t0 slices weighted by their event count
};

struct DdgfConfig {
    double gamma{kStationaryGamma};
    std::optional<int> nt_lag;          // default min(400, nt - 1)
    std::optional<std::size_t> m_points;  // default 4 * (nt_lag + 1)
    std::optional<double> rho0;         // default 10^(-10 / m_points)
    OriginWeighting weighting{OriginWeighting::PerSlice};
    std::vector<double> r_targets;      // default m * dx / 2 for m = 0..nx
    std::optional<double> t_cut;
    std::optional<double> r_cut;

    void validate() const;
};

// Phi(n dt, k_r): ensemble-averaged spectral ratio of the density n days after an
// eventful slice to that slice's individual events.
struct TransferOperator {
    std::vector<double> k;                  // radial bin centers
    double dk{0.0};
    double k_max{0.0};
    double dt{1.0};
    double dx{0.25};
    std::size_t n_lags{0};                  // lags 0..n_lags-1
    std::vector<cplx> phi;                  // [lag][bin]
    std::vector<std::size_t> sample_counts; // admissible t0 per lag

    [[nodiscard]] std::size_t n_bins() const noexcept { return k.size(); }
    [[nodiscard]] cplx at(std::size_t n, std::size_t b) const { return phi[n * k.size() + b]; }
    cplx& at(std::size_t n, std::size_t b) { return phi[n * k.size() + b]; }
};

[[nodiscard]] TransferOperator estimate_phi(const DensityField& field, const DdgfConfig& cfg = {});

struct KernelSolution {
    TriggerKernel kernel;          // real part
    std::vector<double> imag;      // imaginary residue, same layout as kernel.g
    double rho0{1.0};              // radius actually used for coefficient extraction
    std::size_t m_points{0};
};

[[nodiscard]] KernelSolution solve_kernel_detailed(const TransferOperator& op, const GridSpec& grid,
                                                   const DdgfConfig& cfg = {});
[[nodiscard]] TriggerKernel solve_kernel(const TransferOperator& op, const GridSpec& grid,
                                         const DdgfConfig& cfg = {});

// rasterize + estimate_phi + solve_kernel on a training catalog (times in [0, nt)).
[[nodiscard]] TriggerKernel fit_ddgf(const EventCatalog& training, const GridSpec& grid,
                                     const DdgfConfig& cfg = {});

struct LogTailFit {
    double a{0.0};
    double b{0.0};
    double r_squared{0.0};
    std::size_t points{0};
    bool degenerate{false};
};

struct KernelDiagnostics {
    std::vector<double> peak_lags;      // local maxima of g(t, r=0), in days
    std::optional<LogTailFit> tail_fit; // g(t,0) ~ -a log(b t); omitted below 3 points
};

// Least-squares fit of y = -a log(b t) over the given points.
[[nodiscard]] std::optional<LogTailFit> fit_log_tail(const std::vector<double>& t, const std::vector<double>& y);

[[nodiscard]] KernelDiagnostics kernel_diagnostics(const TriggerKernel& kernel, double fit_from_days = 50.0,
                                                   double fit_to_days = 400.0);

void write_phi_csv(std::ostream& out, const TransferOperator& op);

} // namespace hotspot
