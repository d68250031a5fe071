#pragma once

#include "hotspot/ingest.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace hotspot {

struct GridSpec {
    double dx{0.25};  // km
    double dt{1.0};   // days
    int nx{40};
    int ny{40};
    int nt{1};
    double origin_x{-5.0};  // km, lower-left corner of cell (0,0)
    double origin_y{-5.0};

    [[nodiscard]] double cell_area() const noexcept { return dx * dx; }
    [[nodiscard]] std::size_t cells() const noexcept { return static_cast<std::size_t>(nx) * ny; }
    [[nodiscard]] double center_x(int i) const noexcept { return origin_x + (i + 0.5) * dx; }
    [[nodiscard]] double center_y(int j) const noexcept { return origin_y + (j + 0.5) * dx; }

    // Square grid of ceil(2r/dx) cells per side centered on the planar origin.
    [[nodiscard]] static GridSpec for_disc(double radius_km, double dx, double dt, int nt);

    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

struct CellIndex {
    int i{0};
    int j{0};
    bool operator==(const CellIndex&) const = default;
};

// Floor binning from the origin; a point on an upper cell edge belongs to the higher cell.
[[nodiscard]] std::optional<CellIndex> cell_of(double x, double y, const GridSpec& spec);

// Cells whose center lies within radius_km of the planar origin, row-major (j*nx + i).
[[nodiscard]] std::vector<bool> disc_mask(const GridSpec& spec, double radius_km);

class DensityField {
public:
    DensityField() = default;
    explicit DensityField(GridSpec spec);

    [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] double at(int n, int j, int i) const { return values_[index(n, j, i)]; }
    double& at(int n, int j, int i) { return values_[index(n, j, i)]; }
    [[nodiscard]] std::span<const double> slice(int n) const;
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& mutable_values() noexcept { return values_; }

    // sum(values) * cell_area * dt
    [[nodiscard]] double integral() const;
    // Events per slice (integral of one slice), rounded.
    [[nodiscard]] long slice_count(int n) const;

    std::size_t dropped_events{0};

private:
    [[nodiscard]] std::size_t index(int n, int j, int i) const {
        return (static_cast<std::size_t>(n) * spec_.ny + j) * spec_.nx + i;
    }

    GridSpec spec_{};
    std::vector<double> values_;
};

// rho(t,x) = (count in cell and day) / (dx^2 * dt). Events outside the grid are
// counted in dropped_events.
[[nodiscard]] DensityField rasterize(const EventCatalog& catalog, const GridSpec& spec);

void write_field_csv(std::ostream& out, const DensityField& field);
void write_field_binary(std::ostream& out, const DensityField& field);
[[nodiscard]] DensityField read_field_binary(std::istream& in);

} // namespace hotspot
