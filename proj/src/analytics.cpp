#include "lob/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace lob {

namespace {

// Smallest tick p with 2p >= h.
int64_t ceil_half(int64_t h) {
    return h >= 0 ? (h + 1) / 2 : h / 2;
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

template <typename F>
void for_each_quote_interval(const QuoteSeries& quotes, AnalysisWindow window, F&& f) {
    const auto& entries = quotes.entries();
    for (size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].valid) {
            continue;
        }
        const int64_t t0 = std::max(entries[i].timestamp_ms, window.open_ms);
        const int64_t t1 = i + 1 < entries.size()
                               ? std::min(entries[i + 1].timestamp_ms, window.close_ms)
                               : window.close_ms;
        if (t1 > t0) {
            f(entries[i], t1 - t0);
        }
    }
}

}  // namespace

std::vector<std::pair<double, double>> icdf(std::vector<WeightedSample> samples,
                                            std::span<const double> query_points) {
    if (samples.empty()) {
        throw std::invalid_argument("icdf: at least one sample required");
    }
    for (const WeightedSample& s : samples) {
        if (!std::isfinite(s.value) || !std::isfinite(s.weight) || s.weight < 0.0) {
            throw std::invalid_argument("icdf: values and weights must be finite, weights >= 0");
        }
    }
    std::sort(samples.begin(), samples.end(),
              [](const WeightedSample& a, const WeightedSample& b) { return a.value < b.value; });

    const size_t n = samples.size();
    std::vector<double> suffix(n + 1, 0.0);
    for (size_t i = n; i-- > 0;) {
        suffix[i] = suffix[i + 1] + samples[i].weight;
    }
    const double total = suffix[0];
    if (total <= 0.0) {
        throw std::invalid_argument("icdf: total weight is zero");
    }

    std::vector<std::pair<double, double>> out;
    out.reserve(query_points.size());
    for (double x : query_points) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("icdf: query points must be finite");
        }
        auto it = std::upper_bound(samples.begin(), samples.end(), x,
                                   [](double v, const WeightedSample& s) { return v < s.value; });
        const size_t idx = static_cast<size_t>(it - samples.begin());
        out.emplace_back(x, suffix[idx] / total);
    }
    return out;
}

std::vector<std::pair<double, double>> icdf_curve(std::vector<WeightedSample> samples) {
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const WeightedSample& s : samples) {
        xs.push_back(s.value);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return icdf(std::move(samples), xs);
}

double fit_power_tail(const std::vector<double>& values, double x_lo, double x_hi) {
    std::vector<double> in_range;
    for (double v : values) {
        if (v >= x_lo && v <= x_hi && v > 0.0) {
            in_range.push_back(v);
        }
    }
    std::sort(in_range.begin(), in_range.end());
    in_range.erase(std::unique(in_range.begin(), in_range.end()), in_range.end());
    if (in_range.size() < 10) {
        throw std::invalid_argument("fit_power_tail: need >= 10 distinct sample values in range");
    }

    std::vector<WeightedSample> samples;
    samples.reserve(values.size());
    for (double v : values) {
        samples.push_back({v, 1.0});
    }
    auto curve = icdf(std::move(samples), in_range);

    std::vector<std::pair<double, double>> log_points;
    for (auto [x, ix] : curve) {
        if (ix > 0.0) {
            log_points.emplace_back(std::log(x), std::log(ix));
        }
    }
    if (log_points.size() < 2) {
        throw std::invalid_argument("fit_power_tail: empty tail in range");
    }

    double mean_x = 0.0, mean_y = 0.0;
    for (auto [lx, ly] : log_points) {
        mean_x += lx;
        mean_y += ly;
    }
    mean_x /= static_cast<double>(log_points.size());
    mean_y /= static_cast<double>(log_points.size());
    double sxx = 0.0, sxy = 0.0;
    for (auto [lx, ly] : log_points) {
        sxx += (lx - mean_x) * (lx - mean_x);
        sxy += (lx - mean_x) * (ly - mean_y);
    }
    if (sxx <= 0.0) {
        throw std::invalid_argument("fit_power_tail: degenerate range (zero variance of log x)");
    }
    const double slope = sxy / sxx;
    return 1.0 - slope;
}

OccupationProfile occupation_profile(const EventStream& stream, AnalysisWindow window,
                                     int64_t p_rel_range_half_ticks) {
    if (window.open_ms >= window.close_ms) {
        throw std::invalid_argument("occupation_profile: window must be non-empty");
    }
    BookState book;
    std::unordered_map<int64_t, int64_t> occupied_ms;
    int64_t observed_ms = 0;
    int64_t t_prev = window.open_ms;

    auto accumulate_until = [&](int64_t t1) {
        if (t1 <= t_prev) {
            return;
        }
        auto bid = book.best_bid_ticks();
        auto ask = book.best_ask_ticks();
        if (bid && ask) {
            const int64_t dt = t1 - t_prev;
            observed_ms += dt;
            const int64_t mid_half = *bid + *ask;
            const int64_t lo_half = mid_half - p_rel_range_half_ticks;
            const int64_t hi_half = mid_half + p_rel_range_half_ticks;
            const int64_t lo_tick = ceil_half(lo_half);
            auto scan = [&](const std::map<int64_t, BookState::Level>& levels) {
                for (auto it = levels.lower_bound(lo_tick);
                     it != levels.end() && 2 * it->first <= hi_half; ++it) {
                    occupied_ms[2 * it->first - mid_half] += dt;
                }
            };
            scan(book.bids());
            scan(book.asks());
        }
        t_prev = t1;
    };

    for (const OrderEvent& event : stream.events) {
        accumulate_until(std::clamp(event.timestamp_ms, window.open_ms, window.close_ms));
        book.apply_event(event);
    }
    accumulate_until(window.close_ms);

    if (observed_ms == 0) {
        throw std::invalid_argument("occupation_profile: no quote-valid time inside the window");
    }

    OccupationProfile profile;
    profile.p_rel_range_half_ticks = p_rel_range_half_ticks;
    profile.observed_time_ms = observed_ms;
    profile.window_time_ms = window.close_ms - window.open_ms;
    for (auto [rel, ms] : occupied_ms) {
        const double o = static_cast<double>(ms) / static_cast<double>(observed_ms);
        profile.occupation[rel] = o;
        profile.o_max = std::max(profile.o_max, o);
    }
    if (profile.o_max > 0.0) {
        profile.width_ticks = cushion_width(profile).width_ticks;
    }
    return profile;
}

CushionWidth cushion_width(const OccupationProfile& profile) {
    if (profile.occupation.empty() || profile.o_max <= 0.0) {
        throw std::invalid_argument("cushion_width: profile is empty");
    }
    const double threshold = (2.0 / 3.0) * profile.o_max;

    int64_t argmax = 0;
    double best = -1.0;
    for (const auto& [rel, o] : profile.occupation) {
        if (o > best) {
            best = o;
            argmax = rel;
        }
    }

    // Expand around the argmax; interior sub-threshold runs of <= 2 half-ticks
    // (the forced hole at p_rel = 0, one-tick-spread geometry) are bridged.
    const auto& occ = profile.occupation;
    int64_t right = argmax;
    for (;;) {
        int64_t next = right;
        for (auto it = occ.upper_bound(right); it != occ.end() && it->first <= right + 3; ++it) {
            if (it->second >= threshold) {
                next = it->first;
                break;
            }
        }
        if (next == right) {
            break;
        }
        right = next;
    }
    int64_t left = argmax;
    for (;;) {
        int64_t next = left;
        for (auto it = std::make_reverse_iterator(occ.lower_bound(left));
             it != occ.rend() && it->first >= left - 3; ++it) {
            if (it->second >= threshold) {
                next = it->first;
                break;
            }
        }
        if (next == left) {
            break;
        }
        left = next;
    }

    CushionWidth out;
    out.width_ticks = static_cast<double>(right - left) / 2.0;
    out.o_max = profile.o_max;
    out.left_half_ticks = left;
    out.right_half_ticks = right;
    return out;
}

Regime classify_regime(const OrderRecord& record, double width_ticks) {
    if (!record.relative_insertion_price.has_value() ||
        !record.midpoint_at_insertion_half_ticks.has_value()) {
        return Regime::UNCLASSIFIED;
    }
    // p_rel * m(t_i) equals the signed tick distance from the midpoint; in
    // half-ticks it is exact integer arithmetic. CUSHION iff distance (ticks)
    // <= w/2, i.e. distance (half-ticks) <= w.
    const int64_t mid_half = *record.midpoint_at_insertion_half_ticks;
    const int64_t distance_half = record.side == Side::SELL
                                      ? 2 * record.price_ticks - mid_half
                                      : mid_half - 2 * record.price_ticks;
    return static_cast<double>(distance_half) <= width_ticks ? Regime::CUSHION
                                                             : Regime::DISTANT_FIELD;
}

std::vector<ReturnSample> returns_series(const QuoteSeries& quotes, int64_t delta_t_ms,
                                         int64_t sample_ms, AnalysisWindow window) {
    if (delta_t_ms <= 0 || sample_ms <= 0) {
        throw std::invalid_argument("returns_series: delta_t and sample step must be > 0");
    }
    std::vector<ReturnSample> out;
    for (int64_t t = window.open_ms; t + delta_t_ms <= window.close_ms; t += sample_ms) {
        auto m1 = quotes.midpoint_half_at(t);
        auto m2 = quotes.midpoint_half_at(t + delta_t_ms);
        if (m1 && m2) {
            out.push_back({t, std::log(static_cast<double>(*m2) / static_cast<double>(*m1))});
        }
    }
    return out;
}

std::map<int64_t, double> spread_histogram(const QuoteSeries& quotes, AnalysisWindow window) {
    std::map<int64_t, int64_t> spread_ms;
    int64_t total_ms = 0;
    for_each_quote_interval(quotes, window, [&](const QuoteSeries::Entry& e, int64_t dt) {
        spread_ms[e.spread_ticks()] += dt;
        total_ms += dt;
    });
    std::map<int64_t, double> out;
    if (total_ms == 0) {
        return out;
    }
    for (auto [spread, ms] : spread_ms) {
        out[spread] = static_cast<double>(ms) / static_cast<double>(total_ms);
    }
    return out;
}

LevelStats level_statistics(const std::vector<OrderRecord>& records, int max_levels) {
    if (max_levels <= 0) {
        throw std::invalid_argument("level_statistics: max_levels must be > 0");
    }
    LevelStats stats;
    stats.levels.resize(static_cast<size_t>(max_levels));
    std::vector<int64_t> lifetime_sums(static_cast<size_t>(max_levels), 0);

    for (const OrderRecord& record : records) {
        if (!record.opposite_best_at_insertion_ticks.has_value()) {
            ++stats.excluded_no_quote;
            continue;
        }
        const int64_t opposite = *record.opposite_best_at_insertion_ticks;
        const int64_t distance = record.side == Side::BUY ? opposite - record.price_ticks
                                                          : record.price_ticks - opposite;
        const int64_t level = std::max<int64_t>(distance - 1, 0);
        if (level >= max_levels) {
            continue;
        }
        ++stats.levels[static_cast<size_t>(level)].insertion_count;
        lifetime_sums[static_cast<size_t>(level)] += record.lifetime_ms;
    }
    for (size_t l = 0; l < stats.levels.size(); ++l) {
        if (stats.levels[l].insertion_count > 0) {
            stats.levels[l].mean_lifetime_ms = static_cast<double>(lifetime_sums[l]) /
                                               static_cast<double>(stats.levels[l].insertion_count);
        }
    }
    return stats;
}

std::vector<double> average_order_count_by_level(const EventStream& stream, AnalysisWindow window,
                                                 int max_levels, int64_t sample_ms) {
    if (max_levels <= 0 || sample_ms <= 0) {
        throw std::invalid_argument("average_order_count_by_level: bad arguments");
    }
    std::vector<int64_t> count_sums(static_cast<size_t>(max_levels), 0);
    int64_t valid_samples = 0;

    BookState book;
    size_t next_event = 0;
    for (int64_t t = window.open_ms; t < window.close_ms; t += sample_ms) {
        while (next_event < stream.events.size() && stream.events[next_event].timestamp_ms <= t) {
            book.apply_event(stream.events[next_event]);
            ++next_event;
        }
        auto bid = book.best_bid_ticks();
        auto ask = book.best_ask_ticks();
        if (!bid || !ask) {
            continue;
        }
        ++valid_samples;
        for (auto it = book.bids().lower_bound(*ask - max_levels);
             it != book.bids().end() && it->first <= *ask - 1; ++it) {
            const int64_t level = *ask - it->first - 1;
            count_sums[static_cast<size_t>(level)] += static_cast<int64_t>(it->second.queue.size());
        }
        for (auto it = book.asks().lower_bound(*bid + 1);
             it != book.asks().end() && it->first <= *bid + max_levels; ++it) {
            const int64_t level = it->first - *bid - 1;
            count_sums[static_cast<size_t>(level)] += static_cast<int64_t>(it->second.queue.size());
        }
    }

    std::vector<double> means(static_cast<size_t>(max_levels), 0.0);
    if (valid_samples > 0) {
        for (size_t l = 0; l < means.size(); ++l) {
            means[l] = static_cast<double>(count_sums[l]) / static_cast<double>(valid_samples);
        }
    }
    return means;
}

ExponentialFit fit_exponential_loglinear(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_exponential_loglinear: need >= 3 points");
    }
    double mean_x = 0.0, mean_ly = 0.0;
    for (auto [x, y] : points) {
        if (!(y > 0.0)) {
            throw std::invalid_argument("fit_exponential_loglinear: all y values must be > 0");
        }
        mean_x += x;
        mean_ly += std::log(y);
    }
    mean_x /= static_cast<double>(points.size());
    mean_ly /= static_cast<double>(points.size());

    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (std::log(y) - mean_ly);
    }
    if (sxx <= 0.0) {
        throw std::invalid_argument("fit_exponential_loglinear: zero variance in x");
    }
    const double slope = sxy / sxx;
    const double intercept = mean_ly - slope * mean_x;

    ExponentialFit fit;
    fit.amplitude = std::exp(intercept);
    fit.slope = slope;
    fit.scale = slope == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(slope);

    double ss_res = 0.0, ss_tot = 0.0;
    for (auto [x, y] : points) {
        const double ly = std::log(y);
        const double predicted = intercept + slope * x;
        ss_res += (ly - predicted) * (ly - predicted);
        ss_tot += (ly - mean_ly) * (ly - mean_ly);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

int64_t reconstruct_market_order_count(const EventStream& stream) {
    int64_t count = 0;
    bool in_run = false;
    int64_t run_ts = 0, run_price = 0;
    Side run_side = Side::BUY;
    for (const OrderEvent& e : stream.events) {
        const bool is_execution =
            e.kind == EventKind::EXECUTE || e.kind == EventKind::EXECUTE_PARTIAL;
        if (!is_execution) {
            in_run = false;
            continue;
        }
        if (!in_run || e.timestamp_ms != run_ts || e.side != run_side || e.price_ticks != run_price) {
            ++count;
            in_run = true;
            run_ts = e.timestamp_ms;
            run_side = e.side;
            run_price = e.price_ticks;
        }
    }
    return count;
}

double excess_kurtosis(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) {
        return 0.0;
    }
    return m4 / (m2 * m2) - 3.0;
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman_correlation: need two equal-length series");
    }
    auto ranks = [](std::span<const double> v) {
        const size_t n = v.size();
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
                ++j;
            }
            const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (size_t k = i; k <= j; ++k) {
                r[order[k]] = avg_rank;
            }
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    double mean_x = 0.0, mean_y = 0.0;
    const double n = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        mean_x += rx[i];
        mean_y += ry[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (rx[i] - mean_x) * (rx[i] - mean_x);
        syy += (ry[i] - mean_y) * (ry[i] - mean_y);
        sxy += (rx[i] - mean_x) * (ry[i] - mean_y);
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        throw std::invalid_argument("spearman_correlation: constant series");
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<GridCell> order_count_grid(const EventStream& stream, AnalysisWindow window,
                                       int64_t p_rel_range_half_ticks, int64_t sample_ms,
                                       int64_t bin_ticks) {
    if (sample_ms <= 0 || bin_ticks <= 0) {
        throw std::invalid_argument("order_count_grid: bad arguments");
    }
    std::vector<GridCell> out;
    BookState book;
    size_t next_event = 0;

    for (int64_t t = window.open_ms; t < window.close_ms; t += sample_ms) {
        while (next_event < stream.events.size() && stream.events[next_event].timestamp_ms <= t) {
            book.apply_event(stream.events[next_event]);
            ++next_event;
        }
        auto bid = book.best_bid_ticks();
        auto ask = book.best_ask_ticks();
        if (!bid || !ask) {
            continue;
        }
        const int64_t mid_half = *bid + *ask;
        const int64_t lo_half = mid_half - p_rel_range_half_ticks;
        const int64_t hi_half = mid_half + p_rel_range_half_ticks;
        const int64_t lo_tick = ceil_half(lo_half);

        auto emit = [&](const std::map<int64_t, BookState::Level>& levels, Side side) {
            if (bin_ticks == 1) {
                for (auto it = levels.lower_bound(lo_tick);
                     it != levels.end() && 2 * it->first <= hi_half; ++it) {
                    out.push_back({t, 2 * it->first - mid_half, side,
                                   static_cast<double>(it->second.queue.size()),
                                   static_cast<double>(it->second.total_volume)});
                }
            } else {
                std::map<int64_t, std::pair<int64_t, int64_t>> bins;  // bucket -> (count, volume)
                for (auto it = levels.lower_bound(lo_tick);
                     it != levels.end() && 2 * it->first <= hi_half; ++it) {
                    const int64_t rel = 2 * it->first - mid_half;
                    auto& [count, volume] = bins[floor_div(rel, 2 * bin_ticks)];
                    count += static_cast<int64_t>(it->second.queue.size());
                    volume += it->second.total_volume;
                }
                for (auto [bucket, cv] : bins) {
                    out.push_back({t, bucket * 2 * bin_ticks, side,
                                   static_cast<double>(cv.first) / static_cast<double>(bin_ticks),
                                   static_cast<double>(cv.second) / static_cast<double>(bin_ticks)});
                }
            }
        };
        emit(book.bids(), Side::BUY);
        emit(book.asks(), Side::SELL);
    }
    return out;
}

DatasetSummary summarize_dataset(const EventStream& stream, int64_t p_rel_range_half_ticks) {
    const AnalysisWindow window = market_window(stream);
    ReplayResult replay = replay_stream(stream);

    int64_t observed_ms = 0;
    int64_t spread_ms_sum = 0;
    int64_t mid_ms_sum = 0;
    for_each_quote_interval(replay.quotes, window, [&](const QuoteSeries::Entry& e, int64_t dt) {
        observed_ms += dt;
        spread_ms_sum += e.spread_ticks() * dt;
        mid_ms_sum += e.midpoint_half_ticks() * dt;
    });
    if (observed_ms == 0) {
        throw std::invalid_argument("summarize_dataset: stream has no quote inside the market window");
    }

    DatasetSummary summary;
    summary.mean_spread_ticks = static_cast<double>(spread_ms_sum) / static_cast<double>(observed_ms);
    summary.mean_midpoint_half_ticks = static_cast<double>(mid_ms_sum) / static_cast<double>(observed_ms);
    summary.n_quote_changes = replay.quote_changes_in_window;
    summary.quote_valid_fraction = static_cast<double>(observed_ms) /
                                   static_cast<double>(window.close_ms - window.open_ms);

    for (const OrderEvent& e : stream.events) {
        if (e.timestamp_ms < window.open_ms || e.timestamp_ms > window.close_ms) {
            continue;
        }
        switch (e.kind) {
            case EventKind::ADD:
                ++summary.n_limit_orders;
                break;
            case EventKind::EXECUTE:
            case EventKind::EXECUTE_PARTIAL:
            case EventKind::HIDDEN_TRADE:
                ++summary.n_trades;
                summary.traded_capital_cents += e.price_ticks * e.volume_shares * stream.tick_size_cents;
                break;
            default:
                break;
        }
    }

    const OccupationProfile profile = occupation_profile(stream, window, p_rel_range_half_ticks);
    const CushionWidth width = cushion_width(profile);
    summary.width_ticks = width.width_ticks;
    summary.o_max = width.o_max;
    summary.large_tick =
        summary.mean_spread_ticks * static_cast<double>(stream.tick_size_cents) <= 3.0;

    // Declared volatility convention: sample stddev of 1-minute midpoint log
    // returns over market hours.
    const auto returns = returns_series(replay.quotes, 60'000, 60'000, window);
    if (returns.size() >= 2) {
        double mean = 0.0;
        for (const ReturnSample& r : returns) {
            mean += r.log_return;
        }
        mean /= static_cast<double>(returns.size());
        double var = 0.0;
        for (const ReturnSample& r : returns) {
            var += (r.log_return - mean) * (r.log_return - mean);
        }
        summary.volatility = std::sqrt(var / static_cast<double>(returns.size() - 1));
    }
    return summary;
}

}  // namespace lob
