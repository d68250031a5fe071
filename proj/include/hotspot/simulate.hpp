#pragma once

#include "hotspot/ingest.hpp"

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hotspot {

inline constexpr const char* kSimulationRng = "mt19937_64";

struct SimSpec {
    double mu{0.0};              // background events / (km^2 day)
    double branching_ratio{0.5}; // expected offspring per event, must be < 1
    double omega{0.5};           // 1/day
    double sigma_km{0.3};        // per-axis standard deviation of offspring offsets
    double radius_km{kDefaultRadiusKm};
    double horizon_days{400.0};
    std::uint64_t seed{1};
    GeoPoint center{kDefaultCenter};
    Date epoch{std::chrono::year{2010} / std::chrono::May / 5};
    int generation_cap{100};

    void validate() const;
};

struct SimulationResult {
    EventCatalog catalog;
    std::size_t background{0};
    std::size_t offspring{0};            // kept inside the disc and horizon
    std::vector<double> offspring_lags;  // every drawn lag, before discarding
    int max_generation{0};
    bool cap_reached{false};
};

// Uniform draws in [0, 1) built from the generator's raw 64-bit output so that
// streams do not depend on the standard library's distribution code.
class SimRandom {
public:
    explicit SimRandom(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    // Knuth's product method; fine for the small means used here.
    unsigned poisson(double mean);
    // Two independent standard normals (Box-Muller).
    std::pair<double, double> normal_pair();

private:
    std::mt19937_64 engine_;
};

// Cluster construction: Poisson background on disc x [0, T), then each event
// spawns Poisson(n) children with exponential(omega) lags and Gaussian offsets.
[[nodiscard]] SimulationResult simulate_detailed(const SimSpec& spec);
[[nodiscard]] EventCatalog simulate(const SimSpec& spec);

// mu giving `expected_events` in total over the disc and horizon at branching ratio n.
[[nodiscard]] double mu_for_expected_events(double expected_events, double radius_km, double horizon_days,
                                            double branching_ratio);

void write_simulation_json(std::ostream& out, const SimSpec& spec, const SimulationResult& result);

} // namespace hotspot
