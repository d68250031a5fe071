#pragma once

#include "hotspot/evaluate.hpp"
#include "hotspot/simulate.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hotspot {

struct PathSettings {
    std::string input;       // raw incident CSV for `ingest`
    std::string catalog;     // canonical catalog CSV
    std::string kernel;      // kernel CSV for `predict` / `kernel-export`
    std::string output_dir{"out"};
};

struct IngestSettings {
    ColumnMapping columns;
    std::vector<std::string> kinds{"BURGLARY"};  // empty keeps every kind
    std::optional<Date> start{std::chrono::year{2010} / std::chrono::May / 5};
    std::optional<Date> end;                      // exclusive
};

struct ExportSettings {
    double fit_from_days{50.0};
    double fit_to_days{400.0};
};

struct RunConfig {
    std::vector<std::string> methods{"ddgf"};
    PathSettings paths;
    IngestSettings ingest;
    GeoPoint center{kDefaultCenter};
    GridSettings grid;
    Protocol protocol;
    MethodSettings settings;
    SimSpec simulation{default_simulation()};
    ExportSettings export_settings;

    // Roughly 3000 events over 400 days on the 5 km disc.
    [[nodiscard]] static SimSpec default_simulation();

    void validate() const;
};

// Starts from the defaults and overrides every key present; unknown keys and
// ill-typed values raise ConfigError.
[[nodiscard]] RunConfig parse_config(std::istream& in);
[[nodiscard]] RunConfig load_config(const std::string& path);
// Applies a JSON object of overrides on top of an existing config.
void merge_config(RunConfig& cfg, const std::string& json_text);

// Full resolved config, every default written out.
[[nodiscard]] std::string config_to_json(const RunConfig& cfg);
void write_config(std::ostream& out, const RunConfig& cfg);

} // namespace hotspot
