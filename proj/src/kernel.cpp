#include "hotspot/kernel.hpp"

#include "csv.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace hotspot {

TriggerKernel::TriggerKernel(KernelShape s, std::string method_name, double dt_days, double dx_km,
                             std::size_t n_lags, std::vector<double> radii_km)
    : shape(s), method(std::move(method_name)), dt(dt_days), dx(dx_km), radii(std::move(radii_km)) {
    lags.resize(n_lags);
    for (std::size_t n = 0; n < n_lags; ++n) {
        lags[n] = static_cast<double>(n) * dt;
    }
    g.assign(n_lags * radii.size(), 0.0);
}

void TriggerKernel::apply_cutoffs() {
    for (std::size_t n = 0; n < n_lags(); ++n) {
        for (std::size_t m = 0; m < n_radii(); ++m) {
            const bool late = t_cut && lags[n] > *t_cut;
            const bool far = r_cut && radii[m] > *r_cut;
            if (late || far) {
                at(n, m) = 0.0;
            }
        }
    }
}

double TriggerKernel::histogram_mass() const {
    double mass = 0.0;
    for (std::size_t n = 0; n < n_lags(); ++n) {
        for (std::size_t m = 0; m < n_radii(); ++m) {
            const double annulus = std::numbers::pi * dx * dx * (2.0 * static_cast<double>(m) + 1.0);
            mass += at(n, m) * dt * annulus;
        }
    }
    return mass;
}

double TriggerKernel::value(double lag_days, double r_km) const {
    if ((t_cut && lag_days > *t_cut) || (r_cut && r_km > *r_cut) || lags.empty() || radii.empty()) {
        return 0.0;
    }
    if (shape == KernelShape::Histogram) {
        const double fn = std::floor(lag_days / dt);
        const double fm = std::floor(r_km / dx);
        if (fn < 0.0 || fn >= static_cast<double>(n_lags()) || fm < 0.0 ||
            fm >= static_cast<double>(n_radii())) {
            return 0.0;
        }
        return at(static_cast<std::size_t>(fn), static_cast<std::size_t>(fm));
    }
    // A day-binned lag: an event during day D - n contributes at table lag n.
    const double fn = std::ceil(lag_days / dt - 1e-9);
    if (fn < 0.0 || fn >= static_cast<double>(n_lags()) || r_km > radii.back() || r_km < radii.front()) {
        return 0.0;
    }
    const auto n = static_cast<std::size_t>(fn);
    const auto hi = std::upper_bound(radii.begin(), radii.end(), r_km);
    if (hi == radii.end()) {
        return at(n, n_radii() - 1);
    }
    const auto m1 = static_cast<std::size_t>(hi - radii.begin());
    const std::size_t m0 = m1 - 1;
    const double w = (r_km - radii[m0]) / (radii[m1] - radii[m0]);
    return (1.0 - w) * at(n, m0) + w * at(n, m1);
}

std::optional<double> TriggerKernel::max_lag() const {
    if (lags.empty()) {
        return 0.0;
    }
    const double extent = shape == KernelShape::Histogram ? lags.back() + dt : lags.back();
    return t_cut ? std::min(*t_cut, extent) : extent;
}

std::optional<double> TriggerKernel::max_radius() const {
    if (radii.empty()) {
        return 0.0;
    }
    const double extent = shape == KernelShape::Histogram ? radii.back() + 0.5 * dx : radii.back();
    return r_cut ? std::min(*r_cut, extent) : extent;
}

void write_kernel_csv(std::ostream& out, const TriggerKernel& k) {
    out << "# method=" << k.method << '\n'
        << "# shape=" << (k.shape == KernelShape::Histogram ? "histogram" : "tabulated") << '\n'
        << "# dt_days=" << format_double(k.dt) << '\n'
        << "# dx_km=" << format_double(k.dx) << '\n';
    if (k.t_cut) {
        out << "# t_cut_days=" << format_double(*k.t_cut) << '\n';
    }
    if (k.r_cut) {
        out << "# r_cut_km=" << format_double(*k.r_cut) << '\n';
    }
    out << "lag_days,r_km,g_value\n";
    for (std::size_t n = 0; n < k.n_lags(); ++n) {
        for (std::size_t m = 0; m < k.n_radii(); ++m) {
            out << format_double(k.lags[n]) << ',' << format_double(k.radii[m]) << ',' << format_double(k.at(n, m))
                << '\n';
        }
    }
}

TriggerKernel read_kernel_csv(std::istream& in) {
    std::map<std::string, std::string> meta;
    std::string line;
    while (in.peek() == '#') {
        std::getline(in, line);
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            meta[std::string(csv::trim(std::string_view(line).substr(1, eq - 1)))] =
                std::string(csv::trim(std::string_view(line).substr(eq + 1)));
        }
    }
    auto number = [&](const std::string& key) -> std::optional<double> {
        const auto it = meta.find(key);
        if (it == meta.end()) {
            return std::nullopt;
        }
        auto v = csv::to_double(it->second);
        if (!v) {
            throw InputError("kernel file: malformed value for " + key);
        }
        return v;
    };
    TriggerKernel k;
    k.method = meta.count("method") ? meta["method"] : "";
    k.shape = meta["shape"] == "histogram" ? KernelShape::Histogram : KernelShape::Tabulated;
    k.dt = number("dt_days").value_or(1.0);
    k.dx = number("dx_km").value_or(0.25);
    k.t_cut = number("t_cut_days");
    k.r_cut = number("r_cut_km");

    std::vector<std::string> fields;
    if (!csv::read_record(in, ',', fields) || fields.size() != 3 || fields[0] != "lag_days") {
        throw InputError("kernel file: missing lag_days,r_km,g_value header");
    }
    std::vector<double> lag, r, v;
    while (csv::read_record(in, ',', fields)) {
        if (fields.size() == 1 && fields[0].empty()) {
            continue;
        }
        auto a = fields.size() == 3 ? csv::to_double(fields[0]) : std::nullopt;
        auto b = fields.size() == 3 ? csv::to_double(fields[1]) : std::nullopt;
        auto c = fields.size() == 3 ? csv::to_double(fields[2]) : std::nullopt;
        if (!a || !b || !c) {
            throw InputError("kernel file: malformed row");
        }
        lag.push_back(*a);
        r.push_back(*b);
        v.push_back(*c);
    }
    for (std::size_t q = 0; q < lag.size(); ++q) {
        if (k.lags.empty() || k.lags.back() != lag[q]) {
            if (!k.lags.empty() && lag[q] < k.lags.back()) {
                throw InputError("kernel file: lags must be grouped and increasing");
            }
            k.lags.push_back(lag[q]);
        }
        if (k.lags.size() == 1) {
            k.radii.push_back(r[q]);
        }
    }
    if (k.lags.size() * k.radii.size() != v.size()) {
        throw InputError("kernel file: rows do not form a full lag x radius table");
    }
    k.g = std::move(v);
    return k;
}

void save_kernel(const std::string& path, const TriggerKernel& kernel) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write kernel '" + path + "'");
    }
    write_kernel_csv(out, kernel);
}

TriggerKernel load_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open kernel '" + path + "'");
    }
    return read_kernel_csv(in);
}

} // namespace hotspot
