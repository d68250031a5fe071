#include "hotspot/errors.hpp"
#include "hotspot/grid.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace hotspot;

namespace {

Event at(double t, double x, double y) { return {t, 0.0, 0.0, x, y, "X"}; }

GridSpec small_grid(int nt) {
    GridSpec g;
    g.dx = 0.25;
    g.dt = 1.0;
    g.nx = 8;
    g.ny = 6;
    g.nt = nt;
    g.origin_x = -1.0;
    g.origin_y = -0.75;
    return g;
}

} // namespace

TEST(GridSpec, ForDiscMatchesPaperSetup) {
    const auto g = GridSpec::for_disc(5.0, 0.25, 1.0, 400);
    EXPECT_EQ(g.nx, 40);
    EXPECT_EQ(g.ny, 40);
    EXPECT_EQ(g.nt, 400);
    EXPECT_EQ(g.origin_x, -5.0);
    EXPECT_EQ(g.cell_area(), 0.0625);
}

TEST(GridSpec, ValidateRejectsBadSpecs) {
    GridSpec g;
    g.dx = 0.0;
    EXPECT_THROW(g.validate(), ConfigError);
    g = GridSpec{};
    g.nx = 0;
    EXPECT_THROW(g.validate(), ConfigError);
}

TEST(CellOf, EdgeConventions) {
    GridSpec g;
    g.origin_x = 0.0;
    g.origin_y = 0.0;
    EXPECT_EQ(cell_of(0.0, 0.0, g), (CellIndex{0, 0}));
    EXPECT_EQ(cell_of(g.dx, 0.0, g), (CellIndex{1, 0}));
    EXPECT_FALSE(cell_of(-0.1, 0.0, g));
    EXPECT_FALSE(cell_of(g.nx * g.dx, 0.0, g));
}

TEST(Rasterize, SingleEventHoldsSixteen) {
    EventCatalog cat;
    cat.events = {at(0.3, 0.1, 0.1)};
    const auto f = rasterize(cat, small_grid(1));
    const auto c = *cell_of(0.1, 0.1, f.spec());
    for (int j = 0; j < 6; ++j) {
        for (int i = 0; i < 8; ++i) {
            EXPECT_EQ(f.at(0, j, i), (i == c.i && j == c.j) ? 16.0 : 0.0);
        }
    }
}

TEST(Rasterize, TwoEventsSameCellSameDay) {
    EventCatalog cat;
    cat.events = {at(0.1, 0.1, 0.1), at(0.9, 0.2, 0.2)};
    const auto f = rasterize(cat, small_grid(1));
    const auto c = *cell_of(0.1, 0.1, f.spec());
    EXPECT_EQ(f.at(0, c.j, c.i), 32.0);
}

TEST(Rasterize, EmptyCatalogIsZero) {
    const auto f = rasterize(EventCatalog{}, small_grid(3));
    for (double v : f.values()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Rasterize, MassConservationAndDroppedCount) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> x(-1.5, 1.5);
    std::uniform_real_distribution<double> t(0.0, 12.0);
    EventCatalog cat;
    for (int i = 0; i < 500; ++i) {
        cat.events.push_back(at(t(rng), x(rng), x(rng)));
    }
    const auto spec = small_grid(10);
    const auto f = rasterize(cat, spec);
    std::size_t inside = 0;
    for (const auto& e : cat.events) {
        if (e.time < 10.0 && cell_of(e.x, e.y, spec)) {
            ++inside;
        }
    }
    EXPECT_EQ(f.integral(), static_cast<double>(inside));
    EXPECT_EQ(f.dropped_events, cat.size() - inside);
    long total = 0;
    for (int n = 0; n < spec.nt; ++n) {
        total += f.slice_count(n);
    }
    EXPECT_EQ(total, static_cast<long>(inside));
    for (double v : f.values()) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(Rasterize, TranslationByOneCell) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> x(-0.9, 0.6);
    EventCatalog a;
    EventCatalog b;
    for (int i = 0; i < 50; ++i) {
        // Keep positions away from cell edges so the shift cannot flip a floor.
        const double px = std::floor(x(rng) / 0.25) * 0.25 + 0.125;
        const double py = std::floor(x(rng) / 0.25) * 0.25 + 0.125;
        a.events.push_back(at(0.5, px, py));
        b.events.push_back(at(0.5, px + 0.25, py));
    }
    const auto spec = small_grid(1);
    const auto fa = rasterize(a, spec);
    const auto fb = rasterize(b, spec);
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i + 1 < spec.nx; ++i) {
            EXPECT_EQ(fa.at(0, j, i), fb.at(0, j, i + 1));
        }
    }
}

TEST(DiscMask, CountsCellCentersInside) {
    const auto g = GridSpec::for_disc(5.0, 0.25, 1.0, 1);
    const auto mask = disc_mask(g, 5.0);
    std::size_t oracle = 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double cx = -5.0 + (i + 0.5) * 0.25;
            const double cy = -5.0 + (j + 0.5) * 0.25;
            oracle += cx * cx + cy * cy <= 25.0 ? 1 : 0;
        }
    }
    EXPECT_EQ(static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)), oracle);
    EXPECT_NEAR(static_cast<double>(oracle) * 0.0625, 3.14159265 * 25.0, 1.0);
}

TEST(FieldIo, BinaryRoundTripAndCsv) {
    EventCatalog cat;
    cat.events = {at(0.5, 0.1, 0.1), at(1.5, -0.5, 0.3)};
    const auto f = rasterize(cat, small_grid(2));
    std::stringstream bin;
    write_field_binary(bin, f);
    const auto back = read_field_binary(bin);
    EXPECT_EQ(back.spec(), f.spec());
    EXPECT_TRUE(std::equal(back.values().begin(), back.values().end(), f.values().begin()));
    std::stringstream csv;
    write_field_csv(csv, f);
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "n,j,i,value");
    std::stringstream bad("XXXX");
    EXPECT_THROW((void)read_field_binary(bad), InputError);
}
