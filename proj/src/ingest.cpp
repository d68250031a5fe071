#include "hotspot/ingest.hpp"

#include "csv.hpp"
#include "hotspot/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace hotspot {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double days_from_civil(int y, unsigned m, unsigned d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

bool read_int(std::string_view s, std::size_t& pos, std::size_t width, int& out) {
    if (pos + width > s.size()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + width, out);
    if (ec != std::errc{} || ptr != s.data() + pos + width) {
        return false;
    }
    pos += width;
    return true;
}

std::optional<double> parse_iso(std::string_view s) {
    s = csv::trim(s);
    std::size_t p = 0;
    int y = 0, mo = 0, d = 0;
    if (!read_int(s, p, 4, y) || p >= s.size() || s[p++] != '-' || !read_int(s, p, 2, mo) || p >= s.size() ||
        s[p++] != '-' || !read_int(s, p, 2, d)) {
        return std::nullopt;
    }
    double days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    if (std::isnan(days)) {
        return std::nullopt;
    }
    if (p == s.size()) {
        return days;
    }
    if (s[p] != 'T' && s[p] != ' ') {
        return std::nullopt;
    }
    ++p;
    int hh = 0, mm = 0;
    double ss = 0.0;
    if (!read_int(s, p, 2, hh) || p >= s.size() || s[p++] != ':' || !read_int(s, p, 2, mm)) {
        return std::nullopt;
    }
    if (p < s.size() && s[p] == ':') {
        ++p;
        std::size_t end = p;
        while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) {
            ++end;
        }
        auto sec = csv::to_double(s.substr(p, end - p));
        if (!sec) {
            return std::nullopt;
        }
        ss = *sec;
        p = end;
    }
    if (p < s.size() && s[p] == 'Z') {
        ++p;
    }
    if (p != s.size() || hh > 23 || mm > 59 || ss >= 61.0) {
        return std::nullopt;
    }
    return days + (hh * 3600.0 + mm * 60.0 + ss) / 86400.0;
}

std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header, const char* role) {
    if (const auto* idx = std::get_if<std::size_t>(&ref)) {
        if (*idx >= header.size()) {
            throw InputError(std::string("mapped column for ") + role + " (index " + std::to_string(*idx) +
                             ") is beyond the header width");
        }
        return *idx;
    }
    const auto& name = std::get<std::string>(ref);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) == name) {
            return i;
        }
    }
    throw InputError("missing mapped column '" + name + "' for " + role);
}

void sort_by_time(std::vector<Event>& events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
}

} // namespace

bool EventCatalog::operator==(const EventCatalog& other) const {
    return events == other.events && epoch == other.epoch && center.lat == other.center.lat &&
           center.lon == other.center.lon && radius_km == other.radius_km;
}

PlanarPoint project(double lat, double lon, GeoPoint center) {
    const double x = kEarthRadiusKm * std::cos(center.lat * kDegToRad) * (lon - center.lon) * kDegToRad;
    const double y = kEarthRadiusKm * (lat - center.lat) * kDegToRad;
    return {x, y};
}

GeoPoint unproject(PlanarPoint p, GeoPoint center) {
    const double lat = center.lat + p.y / kEarthRadiusKm / kDegToRad;
    const double lon = center.lon + p.x / (kEarthRadiusKm * std::cos(center.lat * kDegToRad)) / kDegToRad;
    return {lat, lon};
}

Date parse_date(std::string_view text) {
    auto ts = parse_iso(text);
    if (!ts || *ts != std::floor(*ts)) {
        throw ConfigError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    return Date{std::chrono::days{static_cast<long>(*ts)}};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::optional<double> parse_timestamp(std::string_view text, std::string_view format) {
    if (format == "iso8601") {
        return parse_iso(text);
    }
    const std::string s(csv::trim(text));
    const std::string fmt(format);
    std::tm tm{};
    const char* end = strptime(s.c_str(), fmt.c_str(), &tm);
    if (end == nullptr || *end != '\0') {
        return std::nullopt;
    }
    const double days = days_from_civil(tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1),
                                        static_cast<unsigned>(tm.tm_mday));
    if (std::isnan(days)) {
        return std::nullopt;
    }
    return days + (tm.tm_hour * 3600.0 + tm.tm_min * 60.0 + tm.tm_sec) / 86400.0;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

ParseResult parse_catalog(std::istream& source, const ColumnMapping& mapping, const CatalogFrame& frame) {
    if (!source) {
        throw InputError("catalog source is not readable");
    }
    std::string first_line;
    if (!std::getline(source, first_line)) {
        throw InputError("catalog source is empty (no header row)");
    }
    char delim = mapping.delimiter;
    if (delim == 0) {
        delim = first_line.find('\t') != std::string::npos && first_line.find(',') == std::string::npos ? '\t' : ',';
    }
    std::vector<std::string> header;
    {
        std::istringstream hs(first_line);
        csv::read_record(hs, delim, header);
    }
    const std::size_t c_date = resolve_column(mapping.date, header, "date");
    const std::size_t c_lat = resolve_column(mapping.latitude, header, "latitude");
    const std::size_t c_lon = resolve_column(mapping.longitude, header, "longitude");
    const std::size_t c_kind = resolve_column(mapping.kind, header, "kind");
    {
        std::vector<std::size_t> cols{c_date, c_lat, c_lon, c_kind};
        std::sort(cols.begin(), cols.end());
        if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) {
            throw ConfigError("column mapping assigns two roles to the same column");
        }
    }
    const std::size_t need = std::max({c_date, c_lat, c_lon, c_kind}) + 1;

    struct Raw {
        double stamp;
        double lat;
        double lon;
        std::string kind;
    };
    std::vector<Raw> raws;
    ParseResult result;
    std::vector<std::string> fields;
    while (csv::read_record(source, delim, fields)) {
        if (fields.size() == 1 && csv::trim(fields[0]).empty()) {
            continue;
        }
        if (fields.size() < need) {
            ++result.skipped;
            continue;
        }
        const auto stamp = parse_timestamp(fields[c_date], mapping.date_format);
        const auto lat = csv::to_double(fields[c_lat]);
        const auto lon = csv::to_double(fields[c_lon]);
        if (!stamp || !lat || !lon || !std::isfinite(*lat) || !std::isfinite(*lon) || std::abs(*lat) > 90.0 ||
            std::abs(*lon) > 180.0) {
            ++result.skipped;
            continue;
        }
        raws.push_back({*stamp, *lat, *lon, std::string(csv::trim(fields[c_kind]))});
    }

    EventCatalog& cat = result.catalog;
    cat.center = frame.center;
    cat.radius_km = frame.radius_km;
    if (frame.epoch) {
        cat.epoch = *frame.epoch;
    } else if (!raws.empty()) {
        const auto earliest = std::min_element(raws.begin(), raws.end(),
                                               [](const Raw& a, const Raw& b) { return a.stamp < b.stamp; });
        cat.epoch = Date{std::chrono::days{static_cast<long>(std::floor(earliest->stamp))}};
    }
    const double epoch_days = static_cast<double>(cat.epoch.time_since_epoch().count());
    cat.events.reserve(raws.size());
    for (auto& r : raws) {
        const PlanarPoint p = project(r.lat, r.lon, cat.center);
        cat.events.push_back({r.stamp - epoch_days, r.lat, r.lon, p.x, p.y, std::move(r.kind)});
    }
    sort_by_time(cat.events);
    return result;
}

ParseResult parse_catalog_file(const std::string& path, const ColumnMapping& mapping, const CatalogFrame& frame) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open catalog '" + path + "'");
    }
    return parse_catalog(in, mapping, frame);
}

EventCatalog filter_catalog(const EventCatalog& catalog, GeoPoint center, double radius_km, Date start, Date end) {
    if (end < start) {
        throw ConfigError("filter window end precedes start");
    }
    const bool same_center = center.lat == catalog.center.lat && center.lon == catalog.center.lon;
    const double lo = static_cast<double>((start - catalog.epoch).count());
    const double hi = static_cast<double>((end - catalog.epoch).count());
    EventCatalog out;
    out.epoch = catalog.epoch;
    out.center = center;
    out.radius_km = radius_km;
    for (const auto& e : catalog.events) {
        if (e.time < lo || e.time >= hi) {
            continue;
        }
        Event moved = e;
        if (!same_center) {
            const PlanarPoint p = project(e.lat, e.lon, center);
            moved.x = p.x;
            moved.y = p.y;
        }
        if (std::hypot(moved.x, moved.y) <= radius_km) {
            out.events.push_back(std::move(moved));
        }
    }
    return out;
}

EventCatalog select_kinds(const EventCatalog& catalog, std::span<const std::string> kinds) {
    EventCatalog out = catalog;
    out.events.clear();
    for (const auto& e : catalog.events) {
        if (std::find(kinds.begin(), kinds.end(), e.kind) != kinds.end()) {
            out.events.push_back(e);
        }
    }
    return out;
}

EventCatalog window(const EventCatalog& catalog, int start_day, int end_day) {
    EventCatalog out;
    out.epoch = catalog.epoch + std::chrono::days{start_day};
    out.center = catalog.center;
    out.radius_km = catalog.radius_km;
    const auto first = std::lower_bound(catalog.events.begin(), catalog.events.end(), static_cast<double>(start_day),
                                        [](const Event& e, double t) { return e.time < t; });
    for (auto it = first; it != catalog.events.end() && it->time < end_day; ++it) {
        Event e = *it;
        e.time -= start_day;
        out.events.push_back(std::move(e));
    }
    return out;
}

void write_catalog_csv(std::ostream& out, const EventCatalog& catalog) {
    out << "# epoch=" << format_date(catalog.epoch) << '\n'
        << "# center_lat=" << format_double(catalog.center.lat) << '\n'
        << "# center_lon=" << format_double(catalog.center.lon) << '\n'
        << "# radius_km=" << format_double(catalog.radius_km) << '\n'
        << "t_days,x_km,y_km,kind,lat,lon\n";
    for (const auto& e : catalog.events) {
        out << format_double(e.time) << ',' << format_double(e.x) << ',' << format_double(e.y) << ','
            << csv::quote(e.kind) << ',' << format_double(e.lat) << ',' << format_double(e.lon) << '\n';
    }
}

EventCatalog read_catalog_csv(std::istream& in) {
    EventCatalog cat;
    bool have_epoch = false;
    std::string line;
    while (in.peek() == '#') {
        std::getline(in, line);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key(csv::trim(std::string_view(line).substr(1, eq - 1)));
        const std::string_view value = csv::trim(std::string_view(line).substr(eq + 1));
        auto number = [&] {
            auto v = csv::to_double(value);
            if (!v) {
                throw InputError("malformed catalog header value for " + key);
            }
            return *v;
        };
        if (key == "epoch") {
            cat.epoch = parse_date(value);
            have_epoch = true;
        } else if (key == "center_lat") {
            cat.center.lat = number();
        } else if (key == "center_lon") {
            cat.center.lon = number();
        } else if (key == "radius_km") {
            cat.radius_km = number();
        }
    }
    if (!have_epoch) {
        throw InputError("canonical catalog is missing the '# epoch=' header");
    }
    std::vector<std::string> fields;
    if (!csv::read_record(in, ',', fields) || fields.size() < 4 || fields[0] != "t_days") {
        throw InputError("canonical catalog is missing its column header");
    }
    std::size_t row = 0;
    while (csv::read_record(in, ',', fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) {
            continue;
        }
        if (fields.size() < 4) {
            throw InputError("canonical catalog row " + std::to_string(row) + " is truncated");
        }
        auto t = csv::to_double(fields[0]);
        auto x = csv::to_double(fields[1]);
        auto y = csv::to_double(fields[2]);
        if (!t || !x || !y) {
            throw InputError("canonical catalog row " + std::to_string(row) + " has a malformed number");
        }
        Event e{*t, 0.0, 0.0, *x, *y, fields[3]};
        std::optional<double> lat, lon;
        if (fields.size() >= 6) {
            lat = csv::to_double(fields[4]);
            lon = csv::to_double(fields[5]);
        }
        if (lat && lon) {
            e.lat = *lat;
            e.lon = *lon;
        } else {
            const GeoPoint g = unproject({e.x, e.y}, cat.center);
            e.lat = g.lat;
            e.lon = g.lon;
        }
        cat.events.push_back(std::move(e));
    }
    sort_by_time(cat.events);
    return cat;
}

void save_catalog(const std::string& path, const EventCatalog& catalog) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write catalog '" + path + "'");
    }
    write_catalog_csv(out, catalog);
}

EventCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open catalog '" + path + "'");
    }
    return read_catalog_csv(in);
}

} // namespace hotspot
