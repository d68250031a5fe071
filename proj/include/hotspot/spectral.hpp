#pragma once

#include "hotspot/grid.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace hotspot {

using cplx = std::complex<double>;

// Continuum-normalized spectrum Y(k) = sum_cells exp(i k.x_cell) Y(x_cell) dS on the
// nx-by-ny wavenumber mesh. Storage is row-major [l][m] in FFT order; signed
// frequencies follow the usual convention (indices >= n/2 are negative).
struct SpectralSlice {
    GridSpec spec;
    std::vector<cplx> values;

    [[nodiscard]] double kx(int m) const;
    [[nodiscard]] double ky(int l) const;
    [[nodiscard]] cplx at(int l, int m) const { return values[static_cast<std::size_t>(l) * spec.nx + m]; }
};

// Reusable FFTW plan pair for one grid shape. Planning is serialized internally;
// execution on distinct objects is thread-safe.
class Fft2d {
public:
    explicit Fft2d(const GridSpec& spec);
    ~Fft2d();
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    [[nodiscard]] SpectralSlice forward(std::span<const double> slice) const;
    [[nodiscard]] SpectralSlice forward(std::span<const cplx> slice) const;
    [[nodiscard]] std::vector<cplx> inverse(const SpectralSlice& spectrum) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

[[nodiscard]] SpectralSlice forward_fft2(std::span<const double> slice, const GridSpec& spec);
[[nodiscard]] std::vector<cplx> inverse_fft2(const SpectralSlice& spectrum);

struct RadialProfile {
    std::vector<double> k;      // bin centers, strictly increasing, k[0] == 0
    std::vector<cplx> value;
    double dk{0.0};
    double k_max{0.0};          // Nyquist, pi / dx
};

// Precomputed annulus membership for a grid: bin b holds mesh points with
// |k| in [b dk - dk/2, b dk + dk/2), dk = 2 pi / (nx dx). Empty bins are dropped.
class RadialBinning {
public:
    explicit RadialBinning(const GridSpec& spec);

    [[nodiscard]] RadialProfile average(std::span<const cplx> mesh) const;
    [[nodiscard]] std::size_t bins() const noexcept { return centers_.size(); }
    [[nodiscard]] std::span<const double> centers() const noexcept { return centers_; }
    [[nodiscard]] double dk() const noexcept { return dk_; }
    [[nodiscard]] double k_max() const noexcept { return k_max_; }

private:
    std::vector<int> bin_of_;  // per mesh point, index into centers_
    std::vector<int> counts_;
    std::vector<double> centers_;
    double dk_{0.0};
    double k_max_{0.0};
};

[[nodiscard]] RadialProfile radial_average(const SpectralSlice& slice);

// Power-series coefficients c_n (n < n_terms) of an analytic function, sampled on
// m_points equispaced points of the circle |w| = rho0. Truncation error is the
// aliased tail c_{n+M} rho0^M.
[[nodiscard]] std::vector<cplx> coeff_extract(const std::function<cplx(cplx)>& evaluator, std::size_t n_terms,
                                              std::size_t m_points, double rho0);

[[nodiscard]] double bessel_j0(double x);

// g(r) = (1/2pi) int_0^{k_max} g(k) J0(k r) k dk by the trapezoidal rule over the
// profile's bin centers up to k_max, with first-derivative end corrections.
[[nodiscard]] std::vector<double> hankel_inverse(std::span<const double> k, std::span<const double> values,
                                                 std::span<const double> r_targets, double k_max);
[[nodiscard]] std::vector<cplx> hankel_inverse(const RadialProfile& profile, std::span<const double> r_targets);

void write_profile_csv(std::ostream& out, const RadialProfile& profile);

} // namespace hotspot
