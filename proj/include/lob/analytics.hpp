#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lob/book.hpp"
#include "lob/events.hpp"
#include "lob/replay.hpp"

namespace lob {

struct WeightedSample {
    double value;
    double weight;  // 1 unweighted, lifetime, volume, or lifetime*volume
};

enum class WeightMode : uint8_t { NONE, LIFETIME, VOLUME, LIFETIME_VOLUME };

// Inverse cumulative distribution I(x) = (sum of weights with value > x) /
// (sum of all weights). Monotone non-increasing, I(-inf)=1, I(+inf)=0.
// Throws std::invalid_argument when samples are empty or total weight is zero.
std::vector<std::pair<double, double>> icdf(std::vector<WeightedSample> samples,
                                            std::span<const double> query_points);

// icdf evaluated at every distinct sample value (the jump points).
std::vector<std::pair<double, double>> icdf_curve(std::vector<WeightedSample> samples);

// Least-squares slope of log I(x) vs log x over sample values inside
// [x_lo, x_hi]; returns the implied density exponent 1 - slope (positive for
// decaying tails, e.g. 2.4 for I(x) ~ x^-1.4). Requires >= 10 distinct values
// in range and nondegenerate log-x spread.
double fit_power_tail(const std::vector<double>& values, double x_lo, double x_hi);

struct AnalysisWindow {
    int64_t open_ms;
    int64_t close_ms;
};

inline AnalysisWindow market_window(const EventStream& stream) {
    return {stream.market_open_ms, stream.market_close_ms};
}

// Time-averaged occupation per relative price level (half-ticks from the
// midpoint). Durations accumulate in integer milliseconds, so O_av values are
// exact ratios of millisecond counts.
struct OccupationProfile {
    std::map<int64_t, double> occupation;  // p_rel half-ticks -> O_av in [0,1]
    int64_t p_rel_range_half_ticks = 0;
    double o_max = 0.0;
    std::optional<double> width_ticks;
    int64_t observed_time_ms = 0;   // market-hours time with a valid quote
    int64_t window_time_ms = 0;     // close - open

    double at(int64_t p_rel_half_ticks) const {
        auto it = occupation.find(p_rel_half_ticks);
        return it == occupation.end() ? 0.0 : it->second;
    }
};

OccupationProfile occupation_profile(const EventStream& stream, AnalysisWindow window,
                                     int64_t p_rel_range_half_ticks);

// Full width at two-thirds of the occupation maximum: the maximal contiguous
// super-threshold region containing the argmax, bridging interior gaps of
// <= 2 half-ticks (the forced hole at p_rel = 0). Width is (r - l) / 2 ticks.
struct CushionWidth {
    double width_ticks;
    double o_max;
    int64_t left_half_ticks;
    int64_t right_half_ticks;
};

CushionWidth cushion_width(const OccupationProfile& profile);

enum class Regime : uint8_t { CUSHION, DISTANT_FIELD, UNCLASSIFIED };

// CUSHION iff p_rel * m(t_i) <= w/2, i.e. the insertion sits within half a
// cushion width of the midpoint (crossing insertions included).
Regime classify_regime(const OrderRecord& record, double width_ticks);

// Log-returns of the midpoint on a regular sampling grid; samples without a
// valid quote at either end are skipped.
struct ReturnSample {
    int64_t timestamp_ms;
    double log_return;
};

std::vector<ReturnSample> returns_series(const QuoteSeries& quotes, int64_t delta_t_ms,
                                         int64_t sample_ms, AnalysisWindow window);

// Fraction of quote-valid time spent at each spread value.
std::map<int64_t, double> spread_histogram(const QuoteSeries& quotes, AnalysisWindow window);

// Insertion counts and mean lifetimes per insertion level
// l = (ticks from the opposite best at insertion) - 1, clamped to >= 0.
struct LevelStats {
    struct Cell {
        int64_t insertion_count = 0;
        double mean_lifetime_ms = 0.0;
    };
    std::vector<Cell> levels;     // index = level
    int64_t excluded_no_quote = 0;  // records without a quote at insertion
};

LevelStats level_statistics(const std::vector<OrderRecord>& records, int max_levels);

// Mean resting-order count per insertion-style level (both sides summed),
// sampled every sample_ms over the window: the average-filling profile of
// the cushion.
std::vector<double> average_order_count_by_level(const EventStream& stream, AnalysisWindow window,
                                                 int max_levels, int64_t sample_ms);

// Least-squares line on (x, ln y): amplitude = exp(intercept),
// scale = 1 / |slope|. Requires >= 3 points, y > 0, nondegenerate x.
struct ExponentialFit {
    double amplitude;
    double scale;
    double slope;
    double r_squared;  // of the log-space fit
};

ExponentialFit fit_exponential_loglinear(const std::vector<std::pair<double, double>>& points);

// Market orders reconstructed from a stream: maximal runs of consecutive
// EXECUTE / EXECUTE_PARTIAL events sharing (timestamp, resting side, price)
// count as one market order each.
int64_t reconstruct_market_order_count(const EventStream& stream);

double excess_kurtosis(std::span<const double> values);

// Spearman rank correlation with average ranks on ties.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

// Sampled order counts / volumes per relative price level per time bucket.
// bin_ticks > 1 groups adjacent prices and reports per-level averages.
struct GridCell {
    int64_t timestamp_ms;
    int64_t p_rel_half_ticks;  // lower edge of the bin when bin_ticks > 1
    Side side;
    double order_count;
    double volume_shares;
};

std::vector<GridCell> order_count_grid(const EventStream& stream, AnalysisWindow window,
                                       int64_t p_rel_range_half_ticks, int64_t sample_ms,
                                       int64_t bin_ticks = 1);

struct DatasetSummary {
    double mean_spread_ticks = 0.0;          // time-averaged over quote-valid time
    double mean_midpoint_half_ticks = 0.0;   // time-averaged over quote-valid time
    int64_t n_quote_changes = 0;
    int64_t n_trades = 0;
    int64_t n_limit_orders = 0;
    int64_t traded_capital_cents = 0;        // sum of trade price * volume * tick_cents
    double width_ticks = 0.0;
    double o_max = 0.0;
    bool large_tick = false;                 // mean spread <= 3 cents
    double volatility = 0.0;                 // stddev of 1-minute midpoint log returns
    double quote_valid_fraction = 0.0;       // observed quote time / window length
};

// All fields over the market-hours window; throws std::invalid_argument when
// the stream never has a two-sided quote inside it.
DatasetSummary summarize_dataset(const EventStream& stream, int64_t p_rel_range_half_ticks = 512);

}  // namespace lob
