#pragma once

#include "hotspot/baselines.hpp"
#include "hotspot/ddgf.hpp"
#include "hotspot/em.hpp"
#include "hotspot/predict.hpp"

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hotspot {

// Raised when a target period has no events, so no hit rate exists.
class UndefinedHitRate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HitCurve {
    std::vector<double> requested;  // fractions asked for
    std::vector<double> fraction;   // a / A actually selected
    std::vector<double> hit_rate;
    std::vector<double> pai;
    std::vector<std::size_t> hits;
    std::size_t n_crimes{0};
    std::size_t n_eligible{0};
};

// Integer percents 1..100 as fractions.
[[nodiscard]] std::vector<double> percent_fractions(int last_percent = 100);

// Selects a = round(f A) top-ranked eligible cells (ties by cell index) for each
// fraction f; crimes outside eligible cells count in the denominator only.
[[nodiscard]] HitCurve hit_rate_curve(const IntensityMap& map, const EventCatalog& actual,
                                      const std::vector<double>& fractions);

enum class LeadMode {
    SingleDay,  // score the last day of the lead period only
    Aggregate,  // sum lambda over the lead period, score all of its events
};

enum class Averaging {
    SampleMean,  // mean of per-sample hit rates
    Pooled,      // total hits over total crimes
};

struct Protocol {
    Date start{std::chrono::year{2010} / std::chrono::May / 5};
    int training_days{400};
    int shift_days{2};
    int samples{50};
    int lead_days{1};
    LeadMode lead_mode{LeadMode::SingleDay};
    Averaging averaging{Averaging::SampleMean};
    int summary_percent{30};
    std::vector<double> fractions{percent_fractions()};
    int workers{1};

    void validate() const;
};

// A procedure that turns a training window into a map for a target period.
class ForecastMethod {
public:
    virtual ~ForecastMethod() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    // training: events with times in [0, training_days); the map is for days
    // [training_days, training_days + lead_days), scored per lead_mode.
    [[nodiscard]] virtual IntensityMap forecast(const EventCatalog& training, int training_days, int lead_days,
                                                LeadMode mode, const GridSpec& grid, double radius_km) const = 0;
};

struct MethodSettings {
    DdgfConfig ddgf;
    EmConfig em;
    PhmConfig phm;
    KdeConfig kde;
    PredictConfig predict;
};

// "ddgf", "em", "phm" or "kde".
[[nodiscard]] std::unique_ptr<ForecastMethod> make_method(const std::string& name, const MethodSettings& settings);

struct SampleResult {
    int index{0};
    Date window_start{};
    Date window_end{};      // last training day, inclusive
    Date target{};          // last day of the scored period
    std::size_t training_events{0};
    std::size_t crimes{0};
    std::optional<HitCurve> curve;
    std::string skipped;    // reason, empty when scored
};

struct BacktestReport {
    std::string method;
    Protocol protocol;
    double dx{0.25};
    double radius_km{kDefaultRadiusKm};
    std::vector<SampleResult> samples;
    HitCurve mean_curve;
    double mean_hit{0.0};  // fraction, averaged over a/A = 1..summary_percent %
    double mean_pai{0.0};
    std::size_t scored{0};
};

struct GridSettings {
    double dx{0.25};
    double dt{1.0};
    double radius_km{kDefaultRadiusKm};
};

[[nodiscard]] BacktestReport backtest(const EventCatalog& dataset, const ForecastMethod& method,
                                      const Protocol& protocol, const GridSettings& grid = {});

struct TableRow {
    std::string method;
    double hit_percent{0.0};
    double pai{0.0};
};

[[nodiscard]] TableRow summarize(const BacktestReport& report);

void write_report_json(std::ostream& out, const BacktestReport& report);
void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows);
void write_curves_csv(std::ostream& out, const std::vector<BacktestReport>& reports);

} // namespace hotspot
