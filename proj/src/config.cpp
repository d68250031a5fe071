#include "hotspot/config.hpp"

#include "hotspot/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <set>

namespace hotspot {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError("config section '" + where + "' must be an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.contains(key)) {
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

std::string path_of(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    try {
        out = it->template get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + path_of(where, key) + "' has the wrong type");
    }
}

void read(const json& obj, const char* key, std::optional<double>& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    if (it->is_null()) {
        out.reset();
    } else if (it->is_number()) {
        out = it->get<double>();
    } else {
        throw ConfigError("config key '" + path_of(where, key) + "' must be a number or null");
    }
}

void read(const json& obj, const char* key, std::optional<int>& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    if (it->is_null()) {
        out.reset();
    } else if (it->is_number_integer()) {
        out = it->get<int>();
    } else {
        throw ConfigError("config key '" + path_of(where, key) + "' must be an integer or null");
    }
}

void read(const json& obj, const char* key, std::optional<std::size_t>& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    if (it->is_null()) {
        out.reset();
    } else if (it->is_number_unsigned()) {
        out = it->get<std::size_t>();
    } else {
        throw ConfigError("config key '" + path_of(where, key) + "' must be a non-negative integer or null");
    }
}

Date read_date(const json& v, const std::string& where) {
    if (!v.is_string()) {
        throw ConfigError("config key '" + where + "' must be a YYYY-MM-DD string");
    }
    try {
        return parse_date(v.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError("config key '" + where + "': " + e.what());
    }
}

void read(const json& obj, const char* key, std::optional<Date>& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    if (it->is_null()) {
        out.reset();
    } else {
        out = read_date(*it, path_of(where, key));
    }
}

void read(const json& obj, const char* key, Date& out, const std::string& where) {
    if (const auto it = obj.find(key); it != obj.end()) {
        out = read_date(*it, path_of(where, key));
    }
}

void read_column(const json& obj, const char* key, ColumnRef& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    if (it->is_string()) {
        out = it->get<std::string>();
    } else if (it->is_number_unsigned()) {
        out = it->get<std::size_t>();
    } else {
        throw ConfigError("config key '" + path_of(where, key) + "' must be a header name or a column index");
    }
}

json column_json(const ColumnRef& c) {
    if (const auto* s = std::get_if<std::string>(&c)) {
        return *s;
    }
    return std::get<std::size_t>(c);
}

template <class E>
void read_enum(const json& obj, const char* key, E& out, std::initializer_list<std::pair<const char*, E>> names,
               const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    if (it->is_string()) {
        for (const auto& [name, value] : names) {
            if (it->get<std::string>() == name) {
                out = value;
                return;
            }
        }
    }
    std::string allowed;
    for (const auto& [name, value] : names) {
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError("config key '" + path_of(where, key) + "' must be one of: " + allowed);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void apply_json(RunConfig& cfg, const json& root) {
    check_keys(root,
               {"methods", "paths", "ingest", "center", "grid", "protocol", "ddgf", "em", "phm", "kde", "predict",
                "simulation", "export"},
               "");
    if (const auto it = root.find("methods"); it != root.end()) {
        if (it->is_string()) {
            cfg.methods = {it->get<std::string>()};
        } else {
            read(root, "methods", cfg.methods, "");
        }
    }
    if (const auto it = root.find("paths"); it != root.end()) {
        const std::string w = "paths";
        check_keys(*it, {"input", "catalog", "kernel", "output_dir"}, w);
        read(*it, "input", cfg.paths.input, w);
        read(*it, "catalog", cfg.paths.catalog, w);
        read(*it, "kernel", cfg.paths.kernel, w);
        read(*it, "output_dir", cfg.paths.output_dir, w);
    }
    if (const auto it = root.find("ingest"); it != root.end()) {
        const std::string w = "ingest";
        check_keys(*it, {"columns", "date_format", "delimiter", "kinds", "start", "end"}, w);
        if (const auto c = it->find("columns"); c != it->end()) {
            check_keys(*c, {"date", "latitude", "longitude", "kind"}, "ingest.columns");
            read_column(*c, "date", cfg.ingest.columns.date, "ingest.columns");
            read_column(*c, "latitude", cfg.ingest.columns.latitude, "ingest.columns");
            read_column(*c, "longitude", cfg.ingest.columns.longitude, "ingest.columns");
            read_column(*c, "kind", cfg.ingest.columns.kind, "ingest.columns");
        }
        read(*it, "date_format", cfg.ingest.columns.date_format, w);
        if (const auto d = it->find("delimiter"); d != it->end()) {
            if (!d->is_string() || d->get<std::string>().size() > 1) {
                throw ConfigError("config key 'ingest.delimiter' must be a single character or \"\" for auto");
            }
            const auto s = d->get<std::string>();
            cfg.ingest.columns.delimiter = s.empty() ? '\0' : s[0];
        }
        read(*it, "kinds", cfg.ingest.kinds, w);
        read(*it, "start", cfg.ingest.start, w);
        read(*it, "end", cfg.ingest.end, w);
    }
    if (const auto it = root.find("center"); it != root.end()) {
        check_keys(*it, {"lat", "lon"}, "center");
        read(*it, "lat", cfg.center.lat, "center");
        read(*it, "lon", cfg.center.lon, "center");
    }
    if (const auto it = root.find("grid"); it != root.end()) {
        check_keys(*it, {"dx_km", "dt_days", "radius_km"}, "grid");
        read(*it, "dx_km", cfg.grid.dx, "grid");
        read(*it, "dt_days", cfg.grid.dt, "grid");
        read(*it, "radius_km", cfg.grid.radius_km, "grid");
    }
    if (const auto it = root.find("protocol"); it != root.end()) {
        const std::string w = "protocol";
        check_keys(*it,
                   {"start", "training_days", "shift_days", "samples", "lead_days", "lead_mode", "averaging",
                    "summary_percent", "curve_percent", "workers"},
                   w);
        auto& p = cfg.protocol;
        read(*it, "start", p.start, w);
        read(*it, "training_days", p.training_days, w);
        read(*it, "shift_days", p.shift_days, w);
        read(*it, "samples", p.samples, w);
        read(*it, "lead_days", p.lead_days, w);
        read_enum(*it, "lead_mode", p.lead_mode, {{"single_day", LeadMode::SingleDay}, {"aggregate", LeadMode::Aggregate}},
                  w);
        read_enum(*it, "averaging", p.averaging,
                  {{"sample_mean", Averaging::SampleMean}, {"pooled", Averaging::Pooled}}, w);
        read(*it, "summary_percent", p.summary_percent, w);
        int curve = static_cast<int>(p.fractions.size());
        read(*it, "curve_percent", curve, w);
        if (curve < 1 || curve > 100) {
            throw ConfigError("config key 'protocol.curve_percent' must be in 1..100");
        }
        p.fractions = percent_fractions(curve);
        read(*it, "workers", p.workers, w);
    }
    auto& s = cfg.settings;
    if (const auto it = root.find("ddgf"); it != root.end()) {
        const std::string w = "ddgf";
        check_keys(*it, {"gamma", "nt_lag", "m_points", "rho0", "weighting", "r_targets", "t_cut", "r_cut"}, w);
        read(*it, "gamma", s.ddgf.gamma, w);
        read(*it, "nt_lag", s.ddgf.nt_lag, w);
        read(*it, "m_points", s.ddgf.m_points, w);
        read(*it, "rho0", s.ddgf.rho0, w);
        read_enum(*it, "weighting", s.ddgf.weighting,
                  {{"per_slice", OriginWeighting::PerSlice}, {"per_event", OriginWeighting::PerEvent}}, w);
        read(*it, "r_targets", s.ddgf.r_targets, w);
        read(*it, "t_cut", s.ddgf.t_cut, w);
        read(*it, "r_cut", s.ddgf.r_cut, w);
    }
    if (const auto it = root.find("em"); it != root.end()) {
        const std::string w = "em";
        check_keys(*it, {"iterations", "dt_days", "t_max_days", "dx_km", "r_max_km", "omega0"}, w);
        read(*it, "iterations", s.em.iterations, w);
        read(*it, "dt_days", s.em.dt, w);
        read(*it, "t_max_days", s.em.t_max, w);
        read(*it, "dx_km", s.em.dx, w);
        read(*it, "r_max_km", s.em.r_max, w);
        read(*it, "omega0", s.em.omega0, w);
    }
    if (const auto it = root.find("phm"); it != root.end()) {
        const std::string w = "phm";
        check_keys(*it, {"tau_days", "dx_km", "t_cut", "r_cut"}, w);
        read(*it, "tau_days", s.phm.tau, w);
        read(*it, "dx_km", s.phm.dx, w);
        read(*it, "t_cut", s.phm.t_cut, w);
        read(*it, "r_cut", s.phm.r_cut, w);
    }
    if (const auto it = root.find("kde"); it != root.end()) {
        check_keys(*it, {"bandwidth_km"}, "kde");
        read(*it, "bandwidth_km", s.kde.bandwidth, "kde");
    }
    if (const auto it = root.find("predict"); it != root.end()) {
        const std::string w = "predict";
        check_keys(*it, {"r_cut", "horizon_days", "negative"}, w);
        read(*it, "r_cut", s.predict.r_cut, w);
        read(*it, "horizon_days", s.predict.horizon_days, w);
        read_enum(*it, "negative", s.predict.negative,
                  {{"clamp", NegativePolicy::Clamp}, {"keep", NegativePolicy::Keep}}, w);
    }
    if (const auto it = root.find("simulation"); it != root.end()) {
        const std::string w = "simulation";
        check_keys(*it, {"mu", "branching_ratio", "omega", "sigma_km", "horizon_days", "seed", "epoch"}, w);
        auto& sim = cfg.simulation;
        read(*it, "mu", sim.mu, w);
        read(*it, "branching_ratio", sim.branching_ratio, w);
        read(*it, "omega", sim.omega, w);
        read(*it, "sigma_km", sim.sigma_km, w);
        read(*it, "horizon_days", sim.horizon_days, w);
        read(*it, "seed", sim.seed, w);
        read(*it, "epoch", sim.epoch, w);
    }
    if (const auto it = root.find("export"); it != root.end()) {
        check_keys(*it, {"fit_from_days", "fit_to_days"}, "export");
        read(*it, "fit_from_days", cfg.export_settings.fit_from_days, "export");
        read(*it, "fit_to_days", cfg.export_settings.fit_to_days, "export");
    }
    // Simulated events share the study disc and frame.
    cfg.simulation.center = cfg.center;
    cfg.simulation.radius_km = cfg.grid.radius_km;
}

json parse_json(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

} // namespace

SimSpec RunConfig::default_simulation() {
    SimSpec s;
    s.horizon_days = 440.0;
    s.mu = mu_for_expected_events(3000.0 * 440.0 / 400.0, s.radius_km, s.horizon_days, s.branching_ratio);
    s.seed = 12345;
    return s;
}

void RunConfig::validate() const {
    if (methods.empty()) {
        throw ConfigError("config 'methods' must name at least one method");
    }
    for (const auto& m : methods) {
        if (m != "ddgf" && m != "em" && m != "phm" && m != "kde") {
            throw ConfigError("unknown method '" + m + "' (expected ddgf, em, phm or kde)");
        }
    }
    if (!(grid.dx > 0.0) || !(grid.dt > 0.0) || !(grid.radius_km > 0.0)) {
        throw ConfigError("grid dx_km, dt_days and radius_km must be positive");
    }
    if (grid.dt != 1.0) {
        throw ConfigError("grid dt_days must be 1: backtests and predictions work on whole days");
    }
    if (!(center.lat >= -90.0 && center.lat <= 90.0 && center.lon >= -180.0 && center.lon <= 180.0)) {
        throw ConfigError("center must be a valid latitude/longitude");
    }
    if (ingest.start && ingest.end && *ingest.end < *ingest.start) {
        throw ConfigError("ingest end precedes start");
    }
    protocol.validate();
    settings.ddgf.validate();
    settings.em.validate();
    settings.phm.validate();
    settings.kde.validate();
    simulation.validate();
    if (!(export_settings.fit_to_days > export_settings.fit_from_days)) {
        throw ConfigError("export fit_to_days must exceed fit_from_days");
    }
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    apply_json(cfg, parse_json(in));
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config file '" + path + "'");
    }
    return parse_config(in);
}

void merge_config(RunConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("override is not valid JSON: ") + e.what());
    }
    apply_json(cfg, j);
    cfg.validate();
}

std::string config_to_json(const RunConfig& cfg) {
    const auto& p = cfg.protocol;
    const auto& s = cfg.settings;
    json j;
    j["methods"] = cfg.methods;
    j["paths"] = {{"input", cfg.paths.input},
                  {"catalog", cfg.paths.catalog},
                  {"kernel", cfg.paths.kernel},
                  {"output_dir", cfg.paths.output_dir}};
    const auto& cm = cfg.ingest.columns;
    j["ingest"] = {{"columns",
                    {{"date", column_json(cm.date)},
                     {"latitude", column_json(cm.latitude)},
                     {"longitude", column_json(cm.longitude)},
                     {"kind", column_json(cm.kind)}}},
                   {"date_format", cm.date_format},
                   {"delimiter", cm.delimiter == '\0' ? std::string() : std::string(1, cm.delimiter)},
                   {"kinds", cfg.ingest.kinds},
                   {"start", cfg.ingest.start ? json(format_date(*cfg.ingest.start)) : json(nullptr)},
                   {"end", cfg.ingest.end ? json(format_date(*cfg.ingest.end)) : json(nullptr)}};
    j["center"] = {{"lat", cfg.center.lat}, {"lon", cfg.center.lon}};
    j["grid"] = {{"dx_km", cfg.grid.dx}, {"dt_days", cfg.grid.dt}, {"radius_km", cfg.grid.radius_km}};
    j["protocol"] = {{"start", format_date(p.start)},
                     {"training_days", p.training_days},
                     {"shift_days", p.shift_days},
                     {"samples", p.samples},
                     {"lead_days", p.lead_days},
                     {"lead_mode", p.lead_mode == LeadMode::SingleDay ? "single_day" : "aggregate"},
                     {"averaging", p.averaging == Averaging::SampleMean ? "sample_mean" : "pooled"},
                     {"summary_percent", p.summary_percent},
                     {"curve_percent", p.fractions.size()},
                     {"workers", p.workers}};
    j["ddgf"] = {{"gamma", s.ddgf.gamma},
                 {"nt_lag", s.ddgf.nt_lag ? json(*s.ddgf.nt_lag) : json(nullptr)},
                 {"m_points", s.ddgf.m_points ? json(*s.ddgf.m_points) : json(nullptr)},
                 {"rho0", opt_json(s.ddgf.rho0)},
                 {"weighting", s.ddgf.weighting == OriginWeighting::PerSlice ? "per_slice" : "per_event"},
                 {"r_targets", s.ddgf.r_targets},
                 {"t_cut", opt_json(s.ddgf.t_cut)},
                 {"r_cut", opt_json(s.ddgf.r_cut)}};
    j["em"] = {{"iterations", s.em.iterations}, {"dt_days", s.em.dt}, {"t_max_days", s.em.t_max},
               {"dx_km", s.em.dx},              {"r_max_km", s.em.r_max}, {"omega0", s.em.omega0}};
    j["phm"] = {{"tau_days", s.phm.tau}, {"dx_km", s.phm.dx}, {"t_cut", opt_json(s.phm.t_cut)},
                {"r_cut", opt_json(s.phm.r_cut)}};
    j["kde"] = {{"bandwidth_km", s.kde.bandwidth}};
    j["predict"] = {{"r_cut", opt_json(s.predict.r_cut)},
                    {"horizon_days", opt_json(s.predict.horizon_days)},
                    {"negative", s.predict.negative == NegativePolicy::Clamp ? "clamp" : "keep"}};
    const auto& sim = cfg.simulation;
    j["simulation"] = {{"mu", sim.mu},         {"branching_ratio", sim.branching_ratio},
                       {"omega", sim.omega},   {"sigma_km", sim.sigma_km},
                       {"horizon_days", sim.horizon_days}, {"seed", sim.seed},
                       {"epoch", format_date(sim.epoch)}};
    j["export"] = {{"fit_from_days", cfg.export_settings.fit_from_days},
                   {"fit_to_days", cfg.export_settings.fit_to_days}};
    return j.dump(2);
}

void write_config(std::ostream& out, const RunConfig& cfg) { out << config_to_json(cfg) << '\n'; }

} // namespace hotspot
