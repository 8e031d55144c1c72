#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lob/events.hpp"

namespace lob {

enum class SimVariant : uint8_t { FULL, UNIFORM_LIFETIME, UNIFORM_ALL };

SimVariant parse_sim_variant(const std::string& name);
std::string sim_variant_name(SimVariant variant);

// Zero-intelligence liquidity-cushion model: N orders arrive at identical
// spacings T/N; each is buy/sell with probability 1/2 and a market order with
// probability P_market. A market order consumes the entire opposite best
// level. A limit order draws level l with P_l proportional to exp(-l / l0),
// prices l+1 ticks inside the opposite best and is cancelled after
// t_lt * exp(l / l_lt) if not traded first. Config-file keys match the
// comments on the right.
struct SimParams {
    int64_t total_orders = 273'835;          // N
    int64_t session_ms = 23'400'000;         // T_ms
    int cushion_levels = 25;                 // L
    double market_order_prob = 0.0147;       // P_market
    double level_scale = 3.045;              // l0
    double base_lifetime_ms = 13'240.0;      // t_lt_ms
    double lifetime_level_scale = 5.46;      // l_lt
    int64_t start_price_ticks = 2'340;       // S0_ticks
    int initial_orders_per_tick = 10;        // initial_orders_per_tick
    int64_t initial_lifetime_ms = 30'000;    // initial_lifetime_ms
    int64_t order_volume_shares = 205;       // order_volume_shares
    int64_t uniform_lifetime_ms = 30'019;    // uniform_lifetime_ms
    SimVariant variant = SimVariant::FULL;   // variant
    uint64_t seed = 1;                       // seed

    void validate() const;  // throws std::invalid_argument
};

// Flat `key = value` config; '#' starts a comment. Unknown keys are errors.
SimParams read_sim_config(const std::string& path);
std::string format_sim_config(const SimParams& params);

// P_0..P_{L-1}: exp(-l / l0) normalized, or 1/L for the UNIFORM_ALL variant.
std::vector<double> level_probabilities(const SimParams& params);

// Deterministic lifetime by insertion level; the simplified variants assign
// the configured uniform lifetime at every level.
double lifetime_for_level(const SimParams& params, int level);

struct RunReport {
    int64_t initial_orders = 0;
    int64_t limit_orders_placed = 0;
    int64_t limit_orders_skipped = 0;   // no opposite best, or non-positive price
    int64_t market_orders_placed = 0;
    int64_t market_orders_skipped = 0;  // empty opposite side
    int64_t executions = 0;             // EXECUTE events emitted
    int64_t cancellations = 0;          // CANCEL events emitted
};

// One (side, market?, level) tuple per arrival; level is -1 for market orders.
struct DrawRecord {
    Side side;
    bool is_market;
    int level;
};

struct SimResult {
    EventStream stream;
    RunReport report;
};

// Runs the model and returns the canonical event stream (internally
// validated) plus counters. Identical params + seed give identical streams.
// Draw order per arrival: side, market-vs-limit, then level for limit orders;
// uniform deviates come from the top 53 bits of mt19937_64 outputs.
SimResult run_simulation(const SimParams& params, std::vector<DrawRecord>* draw_trace = nullptr);

}  // namespace lob
