#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lob/events.hpp"

namespace lob {

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two-sided quote at an instant. Midpoints live on the 0.5-tick grid, so the
// midpoint is stored in integer half-ticks (= bid + ask) to keep arithmetic exact.
struct QuoteSnapshot {
    int64_t timestamp_ms = 0;
    int64_t best_bid_ticks = 0;
    int64_t best_ask_ticks = 0;
    int64_t spread_ticks = 0;
    int64_t midpoint_half_ticks = 0;

    bool operator==(const QuoteSnapshot&) const = default;
};

struct DepthEntry {
    int64_t p_rel_half_ticks;
    Side side;
    int64_t volume_shares;
    int64_t order_count;
};

// Visible limit order book. Price levels keep FIFO queues of resting orders;
// a level's running total equals the sum of its queue volumes at all times.
class BookState {
public:
    struct RestingOrder {
        uint64_t order_id;
        int64_t remaining;
    };
    struct Level {
        std::deque<RestingOrder> queue;
        int64_t total_volume = 0;
    };
    struct LiveOrder {
        Side side;
        int64_t price_ticks;
        int64_t remaining;
        int64_t insertion_time_ms;
    };

    // Applies one event. HIDDEN_TRADE leaves the visible book unchanged.
    // Throws IntegrityError on unknown ids, oversized partials, or side/price
    // mismatches against the referenced ADD.
    void apply_event(const OrderEvent& event);

    std::optional<QuoteSnapshot> quote(int64_t timestamp_ms) const;

    std::optional<int64_t> best_bid_ticks() const;
    std::optional<int64_t> best_ask_ticks() const;

    // Total visible volume at a price, 0 when unoccupied.
    int64_t volume_at(int64_t price_ticks) const;
    int64_t order_count_at(int64_t price_ticks) const;

    // Per-level volumes for occupied levels within +/- half_window_ticks of the
    // center (given in half-ticks), tagged by side, relative prices in half-ticks.
    std::vector<DepthEntry> depth_snapshot(int64_t center_half_ticks, int64_t half_window_ticks) const;

    const std::map<int64_t, Level>& bids() const { return bids_; }
    const std::map<int64_t, Level>& asks() const { return asks_; }
    const std::unordered_map<uint64_t, LiveOrder>& live_orders() const { return live_; }

    bool empty() const { return bids_.empty() && asks_.empty(); }

private:
    void remove_volume(const OrderEvent& event, bool full_removal);

    std::map<int64_t, Level> bids_;
    std::map<int64_t, Level> asks_;
    std::unordered_map<uint64_t, LiveOrder> live_;
};

}  // namespace lob
