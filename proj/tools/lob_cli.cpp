// lob — limit-order-book toolkit CLI: event-stream validation, book
// reconstruction, liquidity statistics and the liquidity-cushion simulator.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lob/analytics.hpp"
#include "lob/book.hpp"
#include "lob/events.hpp"
#include "lob/replay.hpp"
#include "lob/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// CSV output with atomic replace: rows go to <path>.tmp, commit() renames.
class CsvFile {
public:
    explicit CsvFile(const std::string& path)
        : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::trunc) {
        if (!out_) {
            throw lob::IoError("cannot open output file: " + tmp_);
        }
    }

    void line(const std::string& text) { out_ << text << '\n'; }

    void commit() {
        out_.flush();
        if (!out_) {
            throw lob::IoError("write failed: " + tmp_);
        }
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, path_, ec);
        if (ec) {
            throw lob::IoError("rename failed: " + tmp_ + " -> " + path_ + ": " + ec.message());
        }
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
};

lob::EventStream load_validated_stream(const std::string& path) {
    lob::EventStream stream = lob::read_event_file(path);
    const lob::ValidationReport report = lob::validate_stream(stream);
    if (!report.ok()) {
        std::string msg = path + ": " + std::to_string(report.violations.size()) + " violation(s), first: " +
                          lob::violation_to_string(report.violations.front());
        throw ValidationFailure(msg);
    }
    return stream;
}

lob::AnalysisWindow window_with_overrides(const lob::EventStream& stream,
                                          std::optional<int64_t> open_override,
                                          std::optional<int64_t> close_override) {
    lob::AnalysisWindow window = lob::market_window(stream);
    if (open_override) {
        window.open_ms = *open_override;
    }
    if (close_override) {
        window.close_ms = *close_override;
    }
    if (window.open_ms >= window.close_ms) {
        throw UsageError("analysis window is empty (open_ms >= close_ms)");
    }
    return window;
}

void write_report_file(const nlohmann::json& report, const std::string& path) {
    if (path.ends_with(".csv")) {
        CsvFile csv(path);
        csv.line("key,value");
        for (auto& [key, value] : report.items()) {
            if (value.is_object()) {
                for (auto& [inner_key, inner] : value.items()) {
                    csv.line(key + "." + inner_key + "," + inner.dump());
                }
            } else {
                csv.line(key + "," + value.dump());
            }
        }
        csv.commit();
    } else {
        const std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) {
                throw lob::IoError("cannot open output file: " + tmp);
            }
            out << report.dump(2) << '\n';
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) {
            throw lob::IoError("rename failed: " + tmp + " -> " + path + ": " + ec.message());
        }
    }
}

nlohmann::json params_to_json(const lob::SimParams& p) {
    return {
        {"N", p.total_orders},
        {"T_ms", p.session_ms},
        {"L", p.cushion_levels},
        {"P_market", p.market_order_prob},
        {"l0", p.level_scale},
        {"t_lt_ms", p.base_lifetime_ms},
        {"l_lt", p.lifetime_level_scale},
        {"S0_ticks", p.start_price_ticks},
        {"initial_orders_per_tick", p.initial_orders_per_tick},
        {"initial_lifetime_ms", p.initial_lifetime_ms},
        {"order_volume_shares", p.order_volume_shares},
        {"uniform_lifetime_ms", p.uniform_lifetime_ms},
        {"variant", lob::sim_variant_name(p.variant)},
        {"seed", p.seed},
    };
}

nlohmann::json report_to_json(const lob::RunReport& r) {
    return {
        {"initial_orders", r.initial_orders},
        {"limit_orders_placed", r.limit_orders_placed},
        {"limit_orders_skipped", r.limit_orders_skipped},
        {"market_orders_placed", r.market_orders_placed},
        {"market_orders_skipped", r.market_orders_skipped},
        {"executions", r.executions},
        {"cancellations", r.cancellations},
    };
}

lob::SimParams load_sim_params(const std::string& config_path, std::optional<uint64_t> seed_override) {
    lob::SimParams params;
    try {
        params = lob::read_sim_config(config_path);
    } catch (const lob::IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (seed_override) {
        params.seed = *seed_override;
        params.validate();
    }
    return params;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& report_path, std::optional<uint64_t> seed_override) {
    const lob::SimParams params = load_sim_params(config_path, seed_override);
    const lob::SimResult result = lob::run_simulation(params);
    lob::write_event_file(result.stream, out_path);

    nlohmann::json report = {
        {"params", params_to_json(params)},
        {"counters", report_to_json(result.report)},
        {"events", result.stream.events.size()},
    };
    if (!report_path.empty()) {
        write_report_file(report, report_path);
    }
    std::cout << "simulate: " << result.stream.events.size() << " events -> " << out_path << " ("
              << result.report.limit_orders_placed << " limit, " << result.report.market_orders_placed
              << " market, " << result.report.executions << " executions)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& events_path) {
    const lob::EventStream stream = lob::read_event_file(events_path);
    const lob::ValidationReport report = lob::validate_stream(stream);
    if (report.ok()) {
        std::cout << "OK: " << stream.events.size() << " events\n";
        return kExitOk;
    }
    for (const lob::Violation& violation : report.violations) {
        std::cout << lob::violation_to_string(violation) << '\n';
    }
    std::cout << report.violations.size() << " violation(s) in " << stream.events.size()
              << " events\n";
    return kExitValidation;
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

int cmd_reconstruct(const std::string& events_path, const std::string& quotes_out,
                    const std::string& depth_out, int64_t sample_ms, int64_t window_ticks,
                    std::optional<int64_t> open_override, std::optional<int64_t> close_override) {
    const lob::EventStream stream = load_validated_stream(events_path);
    const lob::ReplayResult replay = lob::replay_stream(stream);

    CsvFile quotes(quotes_out);
    quotes.line("timestamp_ms,best_bid_ticks,best_ask_ticks,spread_ticks,midpoint_half_ticks");
    size_t rows = 0;
    for (const auto& entry : replay.quotes.entries()) {
        if (!entry.valid) {
            continue;
        }
        quotes.line(std::to_string(entry.timestamp_ms) + "," + std::to_string(entry.bid_ticks) + "," +
                    std::to_string(entry.ask_ticks) + "," + std::to_string(entry.spread_ticks()) +
                    "," + std::to_string(entry.midpoint_half_ticks()));
        ++rows;
    }
    quotes.commit();
    std::cout << "reconstruct: " << rows << " quote rows -> " << quotes_out << '\n';

    if (!depth_out.empty()) {
        const lob::AnalysisWindow window =
            window_with_overrides(stream, open_override, close_override);
        CsvFile depth(depth_out);
        depth.line("timestamp_ms,p_rel_half_ticks,side,volume_shares,order_count");
        lob::BookState book;
        size_t next_event = 0;
        size_t depth_rows = 0;
        for (int64_t t = window.open_ms; t < window.close_ms; t += sample_ms) {
            while (next_event < stream.events.size() &&
                   stream.events[next_event].timestamp_ms <= t) {
                book.apply_event(stream.events[next_event]);
                ++next_event;
            }
            const auto quote = book.quote(t);
            if (!quote) {
                continue;
            }
            for (const lob::DepthEntry& entry :
                 book.depth_snapshot(quote->midpoint_half_ticks, window_ticks)) {
                depth.line(std::to_string(t) + "," + std::to_string(entry.p_rel_half_ticks) + "," +
                           lob::side_code(entry.side) + "," + std::to_string(entry.volume_shares) +
                           "," + std::to_string(entry.order_count));
                ++depth_rows;
            }
        }
        depth.commit();
        std::cout << "reconstruct: " << depth_rows << " depth rows -> " << depth_out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
    std::string what;
    std::vector<std::string> events;
    std::string out;
    std::string weight = "none";
    int64_t delta_ms = 1000;
    int64_t sample_ms = 1000;
    int64_t bin_ticks = 1;
    int64_t range_half_ticks = 512;
    int max_levels = 50;
    std::optional<double> width_override;
    bool market_hours = false;
    bool split_regime = false;
    std::optional<int64_t> open_override;
    std::optional<int64_t> close_override;
};

lob::WeightMode parse_weight(const std::string& name) {
    if (name == "none") return lob::WeightMode::NONE;
    if (name == "lifetime") return lob::WeightMode::LIFETIME;
    if (name == "volume") return lob::WeightMode::VOLUME;
    if (name == "lifetime-volume") return lob::WeightMode::LIFETIME_VOLUME;
    throw UsageError("unknown weight mode '" + name + "'");
}

double weight_of(const lob::OrderRecord& record, lob::WeightMode mode) {
    switch (mode) {
        case lob::WeightMode::NONE:
            return 1.0;
        case lob::WeightMode::LIFETIME:
            return static_cast<double>(record.lifetime_ms);
        case lob::WeightMode::VOLUME:
            return static_cast<double>(record.initial_volume);
        case lob::WeightMode::LIFETIME_VOLUME:
            return static_cast<double>(record.lifetime_ms) *
                   static_cast<double>(record.initial_volume);
    }
    return 1.0;
}

// Weighted icdf of one per-record quantity, optionally split into regime
// contributions normalized by the classified total.
int analyze_record_distribution(const AnalyzeOptions& opt, const lob::EventStream& stream,
                                const lob::AnalysisWindow& window, const std::string& value_column) {
    const std::vector<lob::OrderRecord> records = lob::build_order_records(stream);
    const lob::WeightMode mode = parse_weight(opt.weight);

    auto value_of = [&](const lob::OrderRecord& r) -> std::optional<double> {
        if (opt.what == "lifetimes") {
            return static_cast<double>(r.lifetime_ms);
        }
        if (opt.what == "volumes") {
            return static_cast<double>(r.initial_volume);
        }
        return r.relative_insertion_price
                   ? std::optional<double>(*r.relative_insertion_price)
                   : std::nullopt;
    };

    std::vector<const lob::OrderRecord*> selected;
    size_t skipped_no_value = 0;
    for (const lob::OrderRecord& r : records) {
        if (opt.market_hours &&
            (r.insertion_time_ms < window.open_ms || r.insertion_time_ms > window.close_ms)) {
            continue;
        }
        if (!value_of(r)) {
            ++skipped_no_value;
            continue;
        }
        selected.push_back(&r);
    }
    if (selected.empty()) {
        throw ValidationFailure("analyze " + opt.what + ": no usable order records");
    }

    CsvFile csv(opt.out);
    if (!opt.split_regime) {
        std::vector<lob::WeightedSample> samples;
        samples.reserve(selected.size());
        for (const lob::OrderRecord* r : selected) {
            samples.push_back({*value_of(*r), weight_of(*r, mode)});
        }
        csv.line(value_column + ",icdf");
        for (auto [x, ix] : lob::icdf_curve(std::move(samples))) {
            csv.line(fmt_double(x) + "," + fmt_double(ix));
        }
        csv.commit();
        std::cout << "analyze " << opt.what << ": " << selected.size() << " records ("
                  << skipped_no_value << " without value) -> " << opt.out << '\n';
        return kExitOk;
    }

    double width = 0.0;
    if (opt.width_override) {
        width = *opt.width_override;
    } else {
        const auto profile = lob::occupation_profile(stream, window, opt.range_half_ticks);
        width = lob::cushion_width(profile).width_ticks;
    }

    // Classified records only. Each regime's contribution is its conditional
    // icdf scaled by the regime's share of the classified total weight, so
    // cushion + distant sum to the total icdf pointwise.
    std::vector<lob::WeightedSample> all, cushion, distant;
    double total_weight = 0.0, cushion_weight = 0.0, distant_weight = 0.0;
    size_t unclassified = 0;
    for (const lob::OrderRecord* r : selected) {
        const lob::Regime regime = lob::classify_regime(*r, width);
        if (regime == lob::Regime::UNCLASSIFIED) {
            ++unclassified;
            continue;
        }
        const lob::WeightedSample sample{*value_of(*r), weight_of(*r, mode)};
        all.push_back(sample);
        total_weight += sample.weight;
        if (regime == lob::Regime::CUSHION) {
            cushion.push_back(sample);
            cushion_weight += sample.weight;
        } else {
            distant.push_back(sample);
            distant_weight += sample.weight;
        }
    }
    if (all.empty()) {
        throw ValidationFailure("analyze " + opt.what + ": no classifiable records");
    }
    std::vector<double> xs;
    xs.reserve(all.size());
    for (const auto& s : all) {
        xs.push_back(s.value);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto contribution = [&](const std::vector<lob::WeightedSample>& subset, double subset_weight) {
        std::vector<double> out(xs.size(), 0.0);
        if (subset_weight > 0.0) {
            const auto curve = lob::icdf(subset, xs);
            for (size_t i = 0; i < xs.size(); ++i) {
                out[i] = curve[i].second * (subset_weight / total_weight);
            }
        }
        return out;
    };
    const auto total_curve = lob::icdf(all, xs);
    const auto cushion_curve = contribution(cushion, cushion_weight);
    const auto distant_curve = contribution(distant, distant_weight);

    csv.line(value_column + ",icdf,icdf_cushion_share,icdf_distant_share");
    for (size_t i = 0; i < xs.size(); ++i) {
        csv.line(fmt_double(xs[i]) + "," + fmt_double(total_curve[i].second) + "," +
                 fmt_double(cushion_curve[i]) + "," + fmt_double(distant_curve[i]));
    }
    csv.commit();
    std::cout << "analyze " << opt.what << ": width " << fmt_double(width) << " ticks, "
              << all.size() << " classified records (" << unclassified << " unclassified) -> "
              << opt.out << '\n';
    return kExitOk;
}

int cmd_analyze(const AnalyzeOptions& opt) {
    if (opt.what == "summary") {
        CsvFile csv(opt.out);
        csv.line(
            "file,mean_spread_ticks,mean_midpoint_half_ticks,n_quote_changes,n_trades,"
            "n_limit_orders,traded_capital_cents,width_ticks,o_max,large_tick,volatility,"
            "quote_valid_fraction");
        for (const std::string& path : opt.events) {
            const lob::EventStream stream = load_validated_stream(path);
            const lob::DatasetSummary s = lob::summarize_dataset(stream, opt.range_half_ticks);
            csv.line(path + "," + fmt_double(s.mean_spread_ticks) + "," +
                     fmt_double(s.mean_midpoint_half_ticks) + "," +
                     std::to_string(s.n_quote_changes) + "," + std::to_string(s.n_trades) + "," +
                     std::to_string(s.n_limit_orders) + "," + std::to_string(s.traded_capital_cents) +
                     "," + fmt_double(s.width_ticks) + "," + fmt_double(s.o_max) + "," +
                     (s.large_tick ? "1" : "0") + "," + fmt_double(s.volatility) + "," +
                     fmt_double(s.quote_valid_fraction));
        }
        csv.commit();
        std::cout << "analyze summary: " << opt.events.size() << " file(s) -> " << opt.out << '\n';
        return kExitOk;
    }

    if (opt.events.size() != 1) {
        throw UsageError("analyze " + opt.what + " takes exactly one --events file");
    }
    const lob::EventStream stream = load_validated_stream(opt.events.front());
    const lob::AnalysisWindow window =
        window_with_overrides(stream, opt.open_override, opt.close_override);

    if (opt.what == "lifetimes") {
        return analyze_record_distribution(opt, stream, window, "lifetime_ms");
    }
    if (opt.what == "volumes") {
        return analyze_record_distribution(opt, stream, window, "volume_shares");
    }
    if (opt.what == "relprices") {
        return analyze_record_distribution(opt, stream, window, "p_rel");
    }

    if (opt.what == "occupation") {
        const auto profile = lob::occupation_profile(stream, window, opt.range_half_ticks);
        const auto width = lob::cushion_width(profile);
        CsvFile csv(opt.out);
        csv.line("p_rel_half_ticks,o_av");
        for (int64_t rel = -opt.range_half_ticks; rel <= opt.range_half_ticks; ++rel) {
            csv.line(std::to_string(rel) + "," + fmt_double(profile.at(rel)));
        }
        csv.commit();
        std::cout << "analyze occupation: width " << fmt_double(width.width_ticks)
                  << " ticks, o_max " << fmt_double(width.o_max) << ", quote-valid fraction "
                  << fmt_double(static_cast<double>(profile.observed_time_ms) /
                                static_cast<double>(profile.window_time_ms))
                  << " -> " << opt.out << '\n';
        return kExitOk;
    }

    if (opt.what == "returns") {
        const lob::ReplayResult replay = lob::replay_stream(stream);
        const auto returns = lob::returns_series(replay.quotes, opt.delta_ms, opt.sample_ms, window);
        CsvFile csv(opt.out);
        csv.line("timestamp_ms,log_return");
        for (const lob::ReturnSample& r : returns) {
            csv.line(std::to_string(r.timestamp_ms) + "," + fmt_double(r.log_return));
        }
        csv.commit();
        std::cout << "analyze returns: " << returns.size() << " samples (delta " << opt.delta_ms
                  << " ms) -> " << opt.out << '\n';
        return kExitOk;
    }

    if (opt.what == "spread") {
        const lob::ReplayResult replay = lob::replay_stream(stream);
        const auto histogram = lob::spread_histogram(replay.quotes, window);
        CsvFile csv(opt.out);
        csv.line("spread_ticks,time_fraction");
        for (auto [spread, fraction] : histogram) {
            csv.line(std::to_string(spread) + "," + fmt_double(fraction));
        }
        csv.commit();
        std::cout << "analyze spread: " << histogram.size() << " distinct spreads -> " << opt.out
                  << '\n';
        return kExitOk;
    }

    if (opt.what == "levels") {
        const auto records = lob::build_order_records(stream);
        const auto stats = lob::level_statistics(records, opt.max_levels);
        CsvFile csv(opt.out);
        csv.line("level,insertion_count,mean_lifetime_ms");
        for (size_t l = 0; l < stats.levels.size(); ++l) {
            csv.line(std::to_string(l) + "," + std::to_string(stats.levels[l].insertion_count) +
                     "," + fmt_double(stats.levels[l].mean_lifetime_ms));
        }
        csv.commit();
        std::cout << "analyze levels: " << records.size() << " records, "
                  << stats.excluded_no_quote << " without quote at insertion -> " << opt.out
                  << '\n';
        return kExitOk;
    }

    if (opt.what == "grid") {
        const auto grid = lob::order_count_grid(stream, window, opt.range_half_ticks,
                                                opt.sample_ms, opt.bin_ticks);
        CsvFile csv(opt.out);
        csv.line("timestamp_ms,p_rel_half_ticks,side,order_count,volume_shares");
        for (const lob::GridCell& cell : grid) {
            csv.line(std::to_string(cell.timestamp_ms) + "," +
                     std::to_string(cell.p_rel_half_ticks) + "," + lob::side_code(cell.side) + "," +
                     fmt_double(cell.order_count) + "," + fmt_double(cell.volume_shares));
        }
        csv.commit();
        std::cout << "analyze grid: " << grid.size() << " cells -> " << opt.out << '\n';
        return kExitOk;
    }

    throw UsageError("unknown analyze target '" + opt.what + "'");
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOptions {
    std::string what;
    std::string events;
    std::string out;
    int max_levels = 25;
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::string tail_of = "volumes";
};

int cmd_fit(const FitOptions& opt) {
    const lob::EventStream stream = load_validated_stream(opt.events);
    nlohmann::json result;

    if (opt.what == "levels" || opt.what == "lifetimes") {
        const auto records = lob::build_order_records(stream);
        const auto stats = lob::level_statistics(records, opt.max_levels);
        std::vector<std::pair<double, double>> points;
        for (size_t l = 0; l < stats.levels.size(); ++l) {
            if (stats.levels[l].insertion_count > 0) {
                const double y = opt.what == "levels"
                                     ? static_cast<double>(stats.levels[l].insertion_count)
                                     : stats.levels[l].mean_lifetime_ms;
                if (y > 0.0) {
                    points.emplace_back(static_cast<double>(l), y);
                }
            }
        }
        const lob::ExponentialFit fit = lob::fit_exponential_loglinear(points);
        result = {{"target", opt.what},
                  {"points", points.size()},
                  {"amplitude", fit.amplitude},
                  {"scale", fit.scale},
                  {"slope", fit.slope},
                  {"r_squared", fit.r_squared}};
        std::cout << "fit " << opt.what << ": amplitude=" << fmt_double(fit.amplitude)
                  << " scale=" << fmt_double(fit.scale) << " slope=" << fmt_double(fit.slope)
                  << " r_squared=" << fmt_double(fit.r_squared) << '\n';
    } else if (opt.what == "powertail") {
        if (!(opt.x_hi > opt.x_lo) || opt.x_lo <= 0.0) {
            throw UsageError("fit powertail needs 0 < --x-lo < --x-hi");
        }
        const auto records = lob::build_order_records(stream);
        std::vector<double> values;
        values.reserve(records.size());
        for (const lob::OrderRecord& r : records) {
            values.push_back(opt.tail_of == "lifetimes" ? static_cast<double>(r.lifetime_ms)
                                                        : static_cast<double>(r.initial_volume));
        }
        const double exponent = lob::fit_power_tail(values, opt.x_lo, opt.x_hi);
        result = {{"target", "powertail"},
                  {"of", opt.tail_of},
                  {"x_lo", opt.x_lo},
                  {"x_hi", opt.x_hi},
                  {"density_exponent", exponent}};
        std::cout << "fit powertail (" << opt.tail_of << "): density_exponent="
                  << fmt_double(exponent) << " over [" << fmt_double(opt.x_lo) << ", "
                  << fmt_double(opt.x_hi) << "]  (exponent = 1 - slope of log icdf vs log x)\n";
    } else {
        throw UsageError("unknown fit target '" + opt.what + "'");
    }

    if (!opt.out.empty()) {
        write_report_file(result, opt.out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// roundtrip
// ---------------------------------------------------------------------------

template <typename F>
auto run_stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage ") + name + " failed: " + e.what());
    }
}

int cmd_roundtrip(const std::string& config_path, const std::string& out_dir,
                  const std::string& report_path, std::optional<uint64_t> seed_override) {
    const lob::SimParams params = load_sim_params(config_path, seed_override);
    std::filesystem::create_directories(out_dir);
    const std::string events_path = (std::filesystem::path(out_dir) / "events.lob").string();

    const lob::SimResult sim = run_stage("simulate", [&] {
        const lob::SimResult result = lob::run_simulation(params);
        lob::write_event_file(result.stream, events_path);
        return result;
    });

    const lob::EventStream stream = run_stage("validate", [&] {
        return load_validated_stream(events_path);
    });

    const lob::ReplayResult replay = run_stage("reconstruct", [&] {
        return lob::replay_stream(stream);
    });

    const lob::AnalysisWindow window = lob::market_window(stream);
    const int levels = params.cushion_levels;
    const int64_t occupation_range = std::max<int64_t>(512, 8 * levels);

    struct Analysis {
        lob::LevelStats level_stats;
        lob::OccupationProfile profile;
        std::map<int64_t, double> spread;
        std::vector<lob::ReturnSample> returns;
    };
    const Analysis analysis = run_stage("analyze", [&] {
        Analysis a{lob::level_statistics(replay.records, levels),
                   lob::occupation_profile(stream, window, occupation_range),
                   lob::spread_histogram(replay.quotes, window),
                   lob::returns_series(replay.quotes, 1000, 1000, window)};
        return a;
    });

    struct Fits {
        std::optional<lob::ExponentialFit> level_fit;
        std::optional<lob::ExponentialFit> lifetime_fit;
        double market_share;
        lob::CushionWidth width;
    };
    const Fits fits = run_stage("fit", [&] {
        Fits f{std::nullopt, std::nullopt, 0.0, lob::cushion_width(analysis.profile)};
        std::vector<std::pair<double, double>> count_points, lifetime_points;
        for (size_t l = 0; l < analysis.level_stats.levels.size(); ++l) {
            const auto& cell = analysis.level_stats.levels[l];
            if (cell.insertion_count > 0) {
                count_points.emplace_back(static_cast<double>(l),
                                          static_cast<double>(cell.insertion_count));
                if (cell.mean_lifetime_ms > 0.0) {
                    lifetime_points.emplace_back(static_cast<double>(l), cell.mean_lifetime_ms);
                }
            }
        }
        if (count_points.size() >= 3) {
            f.level_fit = lob::fit_exponential_loglinear(count_points);
        }
        if (lifetime_points.size() >= 3) {
            f.lifetime_fit = lob::fit_exponential_loglinear(lifetime_points);
        }
        const int64_t market_orders = lob::reconstruct_market_order_count(stream);
        int64_t adds_after_open = 0;
        for (const lob::OrderEvent& e : stream.events) {
            if (e.kind == lob::EventKind::ADD && e.timestamp_ms > 0) {
                ++adds_after_open;
            }
        }
        const int64_t total = market_orders + adds_after_open;
        f.market_share = total > 0 ? static_cast<double>(market_orders) / static_cast<double>(total)
                                   : 0.0;
        return f;
    });

    // Secondary validation statistics.
    std::vector<std::pair<double, double>> spread_points;
    for (auto [spread, fraction] : analysis.spread) {
        if (spread >= 1 && spread <= 4 && fraction > 0.0) {
            spread_points.emplace_back(static_cast<double>(spread), fraction);
        }
    }
    std::optional<lob::ExponentialFit> spread_fit;
    if (spread_points.size() >= 3) {
        spread_fit = lob::fit_exponential_loglinear(spread_points);
    }
    std::vector<double> return_values;
    return_values.reserve(analysis.returns.size());
    for (const lob::ReturnSample& r : analysis.returns) {
        return_values.push_back(r.log_return);
    }
    const double kurtosis = return_values.size() >= 2 ? lob::excess_kurtosis(return_values) : 0.0;

    auto rel_err = [](double fitted, double expected) {
        return expected != 0.0 ? (fitted - expected) / expected : 0.0;
    };

    const double expected_width = static_cast<double>(2 * levels - 1);
    nlohmann::json report = {
        {"params", params_to_json(params)},
        {"counters", report_to_json(sim.report)},
        {"configured",
         {{"l0", params.level_scale},
          {"t_lt_ms", params.base_lifetime_ms},
          {"l_lt", params.lifetime_level_scale},
          {"market_share", params.market_order_prob},
          {"width_ticks", expected_width}}},
        {"fitted", nlohmann::json::object()},
        {"relative_error", nlohmann::json::object()},
        {"checks",
         {{"returns_excess_kurtosis", kurtosis},
          {"quote_valid_fraction",
           static_cast<double>(analysis.profile.observed_time_ms) /
               static_cast<double>(analysis.profile.window_time_ms)},
          {"excluded_no_quote", analysis.level_stats.excluded_no_quote}}},
    };
    report["fitted"]["market_share"] = fits.market_share;
    report["relative_error"]["market_share"] = rel_err(fits.market_share, params.market_order_prob);
    report["fitted"]["width_ticks"] = fits.width.width_ticks;
    report["relative_error"]["width_ticks"] = rel_err(fits.width.width_ticks, expected_width);
    if (fits.level_fit) {
        report["fitted"]["l0"] = fits.level_fit->scale;
        report["relative_error"]["l0"] = rel_err(fits.level_fit->scale, params.level_scale);
    }
    if (fits.lifetime_fit) {
        report["fitted"]["t_lt_ms"] = fits.lifetime_fit->amplitude;
        report["fitted"]["l_lt"] = fits.lifetime_fit->scale;
        report["relative_error"]["t_lt_ms"] =
            rel_err(fits.lifetime_fit->amplitude, params.base_lifetime_ms);
        report["relative_error"]["l_lt"] =
            rel_err(fits.lifetime_fit->scale, params.lifetime_level_scale);
    }
    if (spread_fit) {
        report["checks"]["spread_loglinear_r_squared"] = spread_fit->r_squared;
        report["checks"]["spread_scale_ticks"] = spread_fit->scale;
    }

    std::cout << "roundtrip (" << lob::sim_variant_name(params.variant) << ", seed " << params.seed
              << "): " << stream.events.size() << " events\n";
    auto print_line = [&](const char* name, double configured, double fitted) {
        std::cout << "  " << name << ": configured " << fmt_double(configured) << ", fitted "
                  << fmt_double(fitted) << " (rel err " << fmt_double(rel_err(fitted, configured))
                  << ")\n";
    };
    if (fits.level_fit) {
        print_line("l0", params.level_scale, fits.level_fit->scale);
    }
    if (fits.lifetime_fit) {
        print_line("t_lt_ms", params.base_lifetime_ms, fits.lifetime_fit->amplitude);
        print_line("l_lt", params.lifetime_level_scale, fits.lifetime_fit->scale);
    }
    print_line("market_share", params.market_order_prob, fits.market_share);
    print_line("width_ticks", expected_width, fits.width.width_ticks);
    std::cout << "  returns excess kurtosis: " << fmt_double(kurtosis) << '\n';
    if (spread_fit) {
        std::cout << "  spread log-linear r^2: " << fmt_double(spread_fit->r_squared) << '\n';
    }

    if (!report_path.empty()) {
        write_report_file(report, report_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lob: limit-order-book reconstruction, liquidity statistics and "
                 "liquidity-cushion simulation"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run the liquidity-cushion model");
    std::string sim_config, sim_out, sim_report;
    std::optional<uint64_t> sim_seed;
    simulate->add_option("--config", sim_config, "SimParams config file (key = value)")->required();
    simulate->add_option("--out", sim_out, "Output event file")->required();
    simulate->add_option("--report", sim_report, "Run report path (.json or .csv)");
    simulate->add_option("--seed", sim_seed, "Override the config seed");

    // validate
    auto* validate = app.add_subcommand("validate", "Check event-stream integrity");
    std::string validate_events;
    validate->add_option("--events", validate_events, "Event file")->required();

    // reconstruct
    auto* reconstruct = app.add_subcommand("reconstruct", "Replay the book and export quotes/depth");
    std::string rec_events, rec_quotes, rec_depth;
    int64_t rec_sample_ms = 1000, rec_window_ticks = 50;
    std::optional<int64_t> rec_open, rec_close;
    reconstruct->add_option("--events", rec_events, "Event file")->required();
    reconstruct->add_option("--quotes-out", rec_quotes, "Quote CSV output")->required();
    reconstruct->add_option("--depth-out", rec_depth, "Depth CSV output (sampled)");
    reconstruct->add_option("--sample-ms", rec_sample_ms, "Depth sampling interval [ms]");
    reconstruct->add_option("--window-ticks", rec_window_ticks, "Depth half-window [ticks]");
    reconstruct->add_option("--open-ms", rec_open, "Analysis window open override [ms]");
    reconstruct->add_option("--close-ms", rec_close, "Analysis window close override [ms]");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Compute liquidity statistics to CSV");
    AnalyzeOptions an;
    analyze
        ->add_option("what", an.what,
                     "lifetimes|volumes|relprices|occupation|returns|spread|levels|summary|grid")
        ->required();
    analyze->add_option("--events", an.events, "Event file(s); summary accepts several")
        ->required()
        ->take_all();
    analyze->add_option("--out", an.out, "Output CSV")->required();
    analyze->add_option("--weight", an.weight, "none|lifetime|volume|lifetime-volume");
    analyze->add_option("--delta-ms", an.delta_ms, "Return horizon [ms]");
    analyze->add_option("--sample-ms", an.sample_ms, "Sampling interval [ms]");
    analyze->add_option("--bin-ticks", an.bin_ticks, "Price binning factor for grid");
    analyze->add_option("--range-half-ticks", an.range_half_ticks,
                        "Relative-price range [half-ticks]");
    analyze->add_option("--max-levels", an.max_levels, "Level count for 'levels'");
    analyze->add_option("--width", an.width_override, "Cushion width override [ticks]");
    analyze->add_flag("--market-hours", an.market_hours,
                      "Restrict record statistics to market-hours insertions");
    analyze->add_flag("--split-regime", an.split_regime,
                      "Split icdf into cushion / distant-field contributions");
    analyze->add_option("--open-ms", an.open_override, "Analysis window open override [ms]");
    analyze->add_option("--close-ms", an.close_override, "Analysis window close override [ms]");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit model parameters from a stream");
    FitOptions ft;
    fit->add_option("what", ft.what, "levels|lifetimes|powertail")->required();
    fit->add_option("--events", ft.events, "Event file")->required();
    fit->add_option("--out", ft.out, "Optional report output (.json or .csv)");
    fit->add_option("--max-levels", ft.max_levels, "Levels used for the exponential fits");
    fit->add_option("--x-lo", ft.x_lo, "Power-tail fit range lower bound");
    fit->add_option("--x-hi", ft.x_hi, "Power-tail fit range upper bound");
    fit->add_option("--what-values", ft.tail_of, "volumes|lifetimes for powertail");

    // roundtrip
    auto* roundtrip = app.add_subcommand(
        "roundtrip", "simulate -> validate -> reconstruct -> analyze -> fit consistency run");
    std::string rt_config, rt_out_dir = "roundtrip_out", rt_report;
    std::optional<uint64_t> rt_seed;
    roundtrip->add_option("--config", rt_config, "SimParams config file")->required();
    roundtrip->add_option("--out-dir", rt_out_dir, "Directory for intermediate files");
    roundtrip->add_option("--report", rt_report, "Consolidated report path (.json or .csv)");
    roundtrip->add_option("--seed", rt_seed, "Override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_config, sim_out, sim_report, sim_seed);
        }
        if (validate->parsed()) {
            return cmd_validate(validate_events);
        }
        if (reconstruct->parsed()) {
            return cmd_reconstruct(rec_events, rec_quotes, rec_depth, rec_sample_ms,
                                   rec_window_ticks, rec_open, rec_close);
        }
        if (analyze->parsed()) {
            return cmd_analyze(an);
        }
        if (fit->parsed()) {
            return cmd_fit(ft);
        }
        if (roundtrip->parsed()) {
            return cmd_roundtrip(rt_config, rt_out_dir, rt_report, rt_seed);
        }
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const lob::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const lob::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const lob::IntegrityError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
