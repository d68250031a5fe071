#include "hotspot/grid.hpp"

#include "hotspot/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

namespace hotspot {

namespace {

constexpr char kFieldMagic[4] = {'H', 'S', 'D', 'F'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw InputError("truncated density-field dump");
    }
    return v;
}

} // namespace

GridSpec GridSpec::for_disc(double radius_km, double dx, double dt, int nt) {
    if (!(radius_km > 0.0) || !(dx > 0.0)) {
        throw ConfigError("grid needs a positive radius and cell size");
    }
    GridSpec s;
    s.dx = dx;
    s.dt = dt;
    s.nx = s.ny = static_cast<int>(std::ceil(2.0 * radius_km / dx - 1e-9));
    s.nt = nt;
    s.origin_x = s.origin_y = -0.5 * s.nx * dx;
    s.validate();
    return s;
}

void GridSpec::validate() const {
    if (!(dx > 0.0) || !(dt > 0.0)) {
        throw ConfigError("grid requires dx > 0 and dt > 0");
    }
    if (nx < 1 || ny < 1 || nt < 1) {
        throw ConfigError("grid requires nx, ny, nt >= 1");
    }
}

std::optional<CellIndex> cell_of(double x, double y, const GridSpec& spec) {
    const double fi = std::floor((x - spec.origin_x) / spec.dx);
    const double fj = std::floor((y - spec.origin_y) / spec.dx);
    if (!(fi >= 0.0) || !(fj >= 0.0) || fi >= spec.nx || fj >= spec.ny) {
        return std::nullopt;
    }
    return CellIndex{static_cast<int>(fi), static_cast<int>(fj)};
}

std::vector<bool> disc_mask(const GridSpec& spec, double radius_km) {
    std::vector<bool> mask(spec.cells(), false);
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i < spec.nx; ++i) {
            mask[static_cast<std::size_t>(j) * spec.nx + i] =
                std::hypot(spec.center_x(i), spec.center_y(j)) <= radius_km;
        }
    }
    return mask;
}

DensityField::DensityField(GridSpec spec) : spec_(spec) {
    spec_.validate();
    values_.assign(static_cast<std::size_t>(spec_.nt) * spec_.cells(), 0.0);
}

std::span<const double> DensityField::slice(int n) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(n) * spec_.cells(), spec_.cells());
}

double DensityField::integral() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) * spec_.cell_area() * spec_.dt;
}

long DensityField::slice_count(int n) const {
    const auto s = slice(n);
    return std::lround(std::accumulate(s.begin(), s.end(), 0.0) * spec_.cell_area() * spec_.dt);
}

DensityField rasterize(const EventCatalog& catalog, const GridSpec& spec) {
    DensityField field(spec);
    const double unit = 1.0 / (spec.cell_area() * spec.dt);
    for (const auto& e : catalog.events) {
        const double fn = std::floor(e.time / spec.dt);
        const auto cell = cell_of(e.x, e.y, spec);
        if (!cell || !(fn >= 0.0) || fn >= spec.nt) {
            ++field.dropped_events;
            continue;
        }
        field.at(static_cast<int>(fn), cell->j, cell->i) += unit;
    }
    return field;
}

void write_field_csv(std::ostream& out, const DensityField& field) {
    const auto& s = field.spec();
    out << "n,j,i,value\n";
    for (int n = 0; n < s.nt; ++n) {
        for (int j = 0; j < s.ny; ++j) {
            for (int i = 0; i < s.nx; ++i) {
                out << n << ',' << j << ',' << i << ',' << format_double(field.at(n, j, i)) << '\n';
            }
        }
    }
}

void write_field_binary(std::ostream& out, const DensityField& field) {
    const auto& s = field.spec();
    out.write(kFieldMagic, sizeof kFieldMagic);
    put<std::int32_t>(out, s.nt);
    put<std::int32_t>(out, s.ny);
    put<std::int32_t>(out, s.nx);
    put(out, s.dx);
    put(out, s.dt);
    put(out, s.origin_x);
    put(out, s.origin_y);
    const auto v = field.values();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

DensityField read_field_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kFieldMagic, 4) != 0) {
        throw InputError("not a density-field dump");
    }
    GridSpec s;
    s.nt = get<std::int32_t>(in);
    s.ny = get<std::int32_t>(in);
    s.nx = get<std::int32_t>(in);
    s.dx = get<double>(in);
    s.dt = get<double>(in);
    s.origin_x = get<double>(in);
    s.origin_y = get<double>(in);
    DensityField field(s);
    auto& v = field.mutable_values();
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
        throw InputError("truncated density-field dump");
    }
    return field;
}

} // namespace hotspot
