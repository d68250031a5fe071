#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hotspot {

using Date = std::chrono::sys_days;

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
    double lat{0.0};
    double lon{0.0};
};

struct PlanarPoint {
    double x{0.0};
    double y{0.0};
};

// South-side Chicago reference point used for all paper-style experiments.
inline constexpr GeoPoint kDefaultCenter{41.765, -87.665};
inline constexpr double kDefaultRadiusKm = 5.0;

struct Event {
    double time{0.0};  // fractional days since the catalog epoch
    double lat{0.0};
    double lon{0.0};
    double x{0.0};     // km east of the catalog center
    double y{0.0};     // km north of the catalog center
    std::string kind;

    bool operator==(const Event&) const = default;
};

struct EventCatalog {
    std::vector<Event> events;
    Date epoch{};
    GeoPoint center{kDefaultCenter};
    double radius_km{kDefaultRadiusKm};

    [[nodiscard]] std::size_t size() const noexcept { return events.size(); }
    [[nodiscard]] bool empty() const noexcept { return events.empty(); }

    bool operator==(const EventCatalog& other) const;
};

// A mapped column is either a header name or a zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

struct ColumnMapping {
    ColumnRef date{std::string("Date")};
    ColumnRef latitude{std::string("Latitude")};
    ColumnRef longitude{std::string("Longitude")};
    ColumnRef kind{std::string("Primary Type")};
    // "iso8601" accepts YYYY-MM-DD with an optional [T ]HH:MM[:SS[.fff]][Z] suffix;
    // anything else is handed to strptime.
    std::string date_format{"iso8601"};
    // 0 selects comma or tab from the header line.
    char delimiter{0};
};

// Planar frame and time origin applied while parsing.
struct CatalogFrame {
    std::optional<Date> epoch;  // defaults to the calendar date of the earliest event
    GeoPoint center{kDefaultCenter};
    double radius_km{kDefaultRadiusKm};
};

struct ParseResult {
    EventCatalog catalog;
    std::size_t skipped{0};
};

// Equirectangular projection about `center`.
[[nodiscard]] PlanarPoint project(double lat, double lon, GeoPoint center);
[[nodiscard]] GeoPoint unproject(PlanarPoint p, GeoPoint center);

[[nodiscard]] ParseResult parse_catalog(std::istream& source, const ColumnMapping& mapping,
                                        const CatalogFrame& frame = {});
[[nodiscard]] ParseResult parse_catalog_file(const std::string& path, const ColumnMapping& mapping,
                                             const CatalogFrame& frame = {});

// Keeps events with planar distance <= radius_km from `center` and
// start <= date < end. Positions are re-projected when the center moves.
[[nodiscard]] EventCatalog filter_catalog(const EventCatalog& catalog, GeoPoint center, double radius_km,
                                          Date start, Date end);

[[nodiscard]] EventCatalog select_kinds(const EventCatalog& catalog, std::span<const std::string> kinds);

// Events with start_day <= time < end_day, re-epoched so that start_day becomes t = 0.
[[nodiscard]] EventCatalog window(const EventCatalog& catalog, int start_day, int end_day);

// Canonical CSV: comment header with epoch/center/radius, then
// t_days,x_km,y_km,kind,lat,lon with shortest round-trip number formatting.
void write_catalog_csv(std::ostream& out, const EventCatalog& catalog);
[[nodiscard]] EventCatalog read_catalog_csv(std::istream& in);
void save_catalog(const std::string& path, const EventCatalog& catalog);
[[nodiscard]] EventCatalog load_catalog(const std::string& path);

[[nodiscard]] Date parse_date(std::string_view text);
[[nodiscard]] std::string format_date(Date d);
// Days since 1970-01-01 (fractional). Returns nullopt on malformed text.
[[nodiscard]] std::optional<double> parse_timestamp(std::string_view text, std::string_view format);

// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

} // namespace hotspot
