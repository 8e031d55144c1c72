#include "lob/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "lob/book.hpp"

namespace lob {

SimVariant parse_sim_variant(const std::string& name) {
    if (name == "FULL") return SimVariant::FULL;
    if (name == "UNIFORM_LIFETIME") return SimVariant::UNIFORM_LIFETIME;
    if (name == "UNIFORM_ALL") return SimVariant::UNIFORM_ALL;
    throw std::invalid_argument("unknown variant '" + name +
                                "' (expected FULL, UNIFORM_LIFETIME or UNIFORM_ALL)");
}

std::string sim_variant_name(SimVariant variant) {
    switch (variant) {
        case SimVariant::FULL: return "FULL";
        case SimVariant::UNIFORM_LIFETIME: return "UNIFORM_LIFETIME";
        case SimVariant::UNIFORM_ALL: return "UNIFORM_ALL";
    }
    throw std::logic_error("unreachable variant");
}

void SimParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("SimParams: ") + what);
        }
    };
    require(total_orders >= 0, "N must be >= 0");
    require(session_ms > 0, "T_ms must be > 0");
    require(cushion_levels >= 1, "L must be >= 1");
    require(market_order_prob >= 0.0 && market_order_prob <= 1.0, "P_market must be in [0,1]");
    require(level_scale > 0.0, "l0 must be > 0");
    require(base_lifetime_ms > 0.0, "t_lt_ms must be > 0");
    require(lifetime_level_scale > 0.0, "l_lt must be > 0");
    require(start_price_ticks > cushion_levels, "S0_ticks must be > L");
    require(initial_orders_per_tick >= 1, "initial_orders_per_tick must be >= 1");
    require(initial_lifetime_ms > 0, "initial_lifetime_ms must be > 0");
    require(order_volume_shares > 0, "order_volume_shares must be > 0");
    require(uniform_lifetime_ms > 0, "uniform_lifetime_ms must be > 0");
}

namespace {

struct ConfigField {
    const char* key;
    void (*apply)(SimParams&, const std::string&);
};

int64_t to_i64(const std::string& v) {
    size_t pos = 0;
    int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) {
        throw std::invalid_argument("trailing characters in integer '" + v + "'");
    }
    return out;
}

double to_f64(const std::string& v) {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) {
        throw std::invalid_argument("trailing characters in number '" + v + "'");
    }
    return out;
}

constexpr ConfigField kConfigFields[] = {
    {"N", [](SimParams& p, const std::string& v) { p.total_orders = to_i64(v); }},
    {"T_ms", [](SimParams& p, const std::string& v) { p.session_ms = to_i64(v); }},
    {"L", [](SimParams& p, const std::string& v) { p.cushion_levels = static_cast<int>(to_i64(v)); }},
    {"P_market", [](SimParams& p, const std::string& v) { p.market_order_prob = to_f64(v); }},
    {"l0", [](SimParams& p, const std::string& v) { p.level_scale = to_f64(v); }},
    {"t_lt_ms", [](SimParams& p, const std::string& v) { p.base_lifetime_ms = to_f64(v); }},
    {"l_lt", [](SimParams& p, const std::string& v) { p.lifetime_level_scale = to_f64(v); }},
    {"S0_ticks", [](SimParams& p, const std::string& v) { p.start_price_ticks = to_i64(v); }},
    {"initial_orders_per_tick",
     [](SimParams& p, const std::string& v) { p.initial_orders_per_tick = static_cast<int>(to_i64(v)); }},
    {"initial_lifetime_ms", [](SimParams& p, const std::string& v) { p.initial_lifetime_ms = to_i64(v); }},
    {"order_volume_shares", [](SimParams& p, const std::string& v) { p.order_volume_shares = to_i64(v); }},
    {"uniform_lifetime_ms", [](SimParams& p, const std::string& v) { p.uniform_lifetime_ms = to_i64(v); }},
    {"variant", [](SimParams& p, const std::string& v) { p.variant = parse_sim_variant(v); }},
    {"seed", [](SimParams& p, const std::string& v) { p.seed = static_cast<uint64_t>(std::stoull(v)); }},
};

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Uniform deviate in [0, 1) from the top 53 bits; keeps the draw stream
// identical for every standard mt19937_64.
class UnitSampler {
public:
    explicit UnitSampler(uint64_t seed) : engine_(seed) {}
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

}  // namespace

SimParams read_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    SimParams params;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (size_t hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        for (const ConfigField& field : kConfigFields) {
            if (key == field.key) {
                try {
                    field.apply(params, value);
                } catch (const std::exception& e) {
                    throw std::invalid_argument("config line " + std::to_string(line_no) + " (" +
                                                key + "): " + e.what());
                }
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
    }
    params.validate();
    return params;
}

std::string format_sim_config(const SimParams& p) {
    std::ostringstream out;
    out << "N = " << p.total_orders << '\n'
        << "T_ms = " << p.session_ms << '\n'
        << "L = " << p.cushion_levels << '\n'
        << "P_market = " << p.market_order_prob << '\n'
        << "l0 = " << p.level_scale << '\n'
        << "t_lt_ms = " << p.base_lifetime_ms << '\n'
        << "l_lt = " << p.lifetime_level_scale << '\n'
        << "S0_ticks = " << p.start_price_ticks << '\n'
        << "initial_orders_per_tick = " << p.initial_orders_per_tick << '\n'
        << "initial_lifetime_ms = " << p.initial_lifetime_ms << '\n'
        << "order_volume_shares = " << p.order_volume_shares << '\n'
        << "uniform_lifetime_ms = " << p.uniform_lifetime_ms << '\n'
        << "variant = " << sim_variant_name(p.variant) << '\n'
        << "seed = " << p.seed << '\n';
    return out.str();
}

std::vector<double> level_probabilities(const SimParams& params) {
    const int levels = params.cushion_levels;
    std::vector<double> probs(static_cast<size_t>(levels));
    if (params.variant == SimVariant::UNIFORM_ALL) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(levels));
        return probs;
    }
    double sum = 0.0;
    for (int l = 0; l < levels; ++l) {
        probs[static_cast<size_t>(l)] = std::exp(-static_cast<double>(l) / params.level_scale);
        sum += probs[static_cast<size_t>(l)];
    }
    for (double& p : probs) {
        p /= sum;
    }
    return probs;
}

double lifetime_for_level(const SimParams& params, int level) {
    if (params.variant != SimVariant::FULL) {
        return static_cast<double>(params.uniform_lifetime_ms);
    }
    return params.base_lifetime_ms *
           std::exp(static_cast<double>(level) / params.lifetime_level_scale);
}

SimResult run_simulation(const SimParams& params, std::vector<DrawRecord>* draw_trace) {
    params.validate();

    SimResult result;
    EventStream& stream = result.stream;
    RunReport& report = result.report;
    stream.session_start_ms = 0;
    stream.session_end_ms = params.session_ms;
    stream.market_open_ms = 0;
    stream.market_close_ms = params.session_ms;
    stream.tick_size_cents = 1;

    BookState book;
    UnitSampler rng(params.seed);

    const std::vector<double> level_probs = level_probabilities(params);
    std::vector<double> level_cdf(level_probs.size());
    double running = 0.0;
    for (size_t l = 0; l < level_probs.size(); ++l) {
        running += level_probs[l];
        level_cdf[l] = running;
    }
    level_cdf.back() = 1.0;

    // Min-heap on (expiry, order_id): expiry-order processing, ties by id.
    using PendingCancel = std::pair<int64_t, uint64_t>;
    std::priority_queue<PendingCancel, std::vector<PendingCancel>, std::greater<>> pending;

    uint64_t next_order_id = 1;

    auto emit = [&](const OrderEvent& event) {
        book.apply_event(event);
        stream.events.push_back(event);
    };

    auto add_limit = [&](int64_t ts, Side side, int64_t price, double unrounded_insertion,
                         double lifetime_ms) {
        const uint64_t id = next_order_id++;
        emit({ts, EventKind::ADD, id, side, price, params.order_volume_shares});
        // Expiry from the unrounded insertion time, rounded toward zero once.
        const auto expiry = static_cast<int64_t>(unrounded_insertion + lifetime_ms);
        pending.push({expiry, id});
    };

    auto process_cancellations = [&](int64_t up_to_ms, int64_t cap_ms) {
        while (!pending.empty() && pending.top().first <= up_to_ms) {
            const auto [expiry, id] = pending.top();
            pending.pop();
            auto it = book.live_orders().find(id);
            if (it == book.live_orders().end()) {
                continue;  // already traded
            }
            const BookState::LiveOrder& order = it->second;
            emit({std::min(expiry, cap_ms), EventKind::CANCEL, id, order.side, order.price_ticks,
                  order.remaining});
            ++report.cancellations;
        }
    };

    // Initial fill: ten orders per tick on S0-1..S0-L and S0+1..S0+L, buys
    // first, all at t = 0 with the initial lifetime.
    for (int offset = 1; offset <= params.cushion_levels; ++offset) {
        for (int i = 0; i < params.initial_orders_per_tick; ++i) {
            add_limit(0, Side::BUY, params.start_price_ticks - offset, 0.0,
                      static_cast<double>(params.initial_lifetime_ms));
            ++report.initial_orders;
        }
    }
    for (int offset = 1; offset <= params.cushion_levels; ++offset) {
        for (int i = 0; i < params.initial_orders_per_tick; ++i) {
            add_limit(0, Side::SELL, params.start_price_ticks + offset, 0.0,
                      static_cast<double>(params.initial_lifetime_ms));
            ++report.initial_orders;
        }
    }

    for (int64_t k = 0; k < params.total_orders; ++k) {
        const int64_t clock_ms = (k + 1) * params.session_ms / params.total_orders;
        const double unrounded_clock = static_cast<double>(k + 1) *
                                       static_cast<double>(params.session_ms) /
                                       static_cast<double>(params.total_orders);
        process_cancellations(clock_ms, params.session_ms);

        const Side side = rng.next() < 0.5 ? Side::BUY : Side::SELL;
        const bool is_market = rng.next() < params.market_order_prob;

        if (is_market) {
            if (draw_trace != nullptr) {
                draw_trace->push_back({side, true, -1});
            }
            // Consumes the whole opposite best level, one EXECUTE per order.
            const auto& levels = side == Side::BUY ? book.asks() : book.bids();
            if (levels.empty()) {
                ++report.market_orders_skipped;
                continue;
            }
            const auto& [price, level] = side == Side::BUY ? *levels.begin() : *levels.rbegin();
            const Side resting_side = side == Side::BUY ? Side::SELL : Side::BUY;
            std::vector<std::pair<uint64_t, int64_t>> fills;
            fills.reserve(level.queue.size());
            for (const BookState::RestingOrder& resting : level.queue) {
                fills.emplace_back(resting.order_id, resting.remaining);
            }
            for (const auto& [id, volume] : fills) {
                emit({clock_ms, EventKind::EXECUTE, id, resting_side, price, volume});
                ++report.executions;
            }
            ++report.market_orders_placed;
        } else {
            const double u = rng.next();
            const auto level_it = std::upper_bound(level_cdf.begin(), level_cdf.end(), u);
            const int level = static_cast<int>(
                std::min<size_t>(static_cast<size_t>(level_it - level_cdf.begin()),
                                 level_cdf.size() - 1));
            if (draw_trace != nullptr) {
                draw_trace->push_back({side, false, level});
            }
            const auto opposite =
                side == Side::BUY ? book.best_ask_ticks() : book.best_bid_ticks();
            if (!opposite) {
                ++report.limit_orders_skipped;
                continue;
            }
            const int64_t price = side == Side::BUY ? *opposite - (level + 1)
                                                    : *opposite + (level + 1);
            if (price <= 0) {
                ++report.limit_orders_skipped;
                continue;
            }
            add_limit(clock_ms, side, price, unrounded_clock,
                      lifetime_for_level(params, level));
            ++report.limit_orders_placed;
        }
    }

    // Final drain: remaining lifetimes extend past T; their cancellations are
    // emitted at T in expiry order.
    process_cancellations(std::numeric_limits<int64_t>::max(), params.session_ms);

    const ValidationReport validation = validate_stream(stream);
    if (!validation.ok()) {
        throw std::logic_error("run_simulation produced an invalid stream: " +
                               violation_to_string(validation.violations.front()));
    }
    return result;
}

}  // namespace lob
