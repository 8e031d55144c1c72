#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lob/book.hpp"
#include "lob/events.hpp"

namespace lob {

// Per-order insertion/removal facts. An order's lifetime runs from insertion
// until its remaining volume first reaches zero; orders still live at session
// end carry lifetime = session_end - insertion and the censored flag.
struct OrderRecord {
    uint64_t order_id = 0;
    Side side = Side::BUY;
    int64_t price_ticks = 0;
    int64_t insertion_time_ms = 0;
    int64_t initial_volume = 0;
    std::optional<int64_t> removal_time_ms;
    int64_t lifetime_ms = 0;
    bool censored = false;
    // Quote immediately before the ADD was applied; absent when the book was
    // one-sided or empty at insertion.
    std::optional<int64_t> midpoint_at_insertion_half_ticks;
    std::optional<int64_t> opposite_best_at_insertion_ticks;
    std::optional<double> relative_insertion_price;
};

// Timeline of quote change-points. An invalid entry marks the instant the
// book lost a two-sided quote.
class QuoteSeries {
public:
    struct Entry {
        int64_t timestamp_ms;
        bool valid;
        int64_t bid_ticks;
        int64_t ask_ticks;

        int64_t spread_ticks() const { return ask_ticks - bid_ticks; }
        int64_t midpoint_half_ticks() const { return ask_ticks + bid_ticks; }
    };

    void push(const Entry& entry) { entries_.push_back(entry); }
    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    // Latest entry with timestamp <= t; nullptr when none exists.
    const Entry* at_or_before(int64_t t) const;

    // Midpoint (half-ticks) in force at t, if a valid quote exists there.
    std::optional<int64_t> midpoint_half_at(int64_t t) const;

private:
    std::vector<Entry> entries_;
};

struct ReplayResult {
    std::vector<OrderRecord> records;
    QuoteSeries quotes;
    BookState final_book;
    // (bid, ask) pair changes inside [market_open, market_close], excluding the
    // first quote establishment; gaps without a quote do not reset the pair.
    int64_t quote_changes_in_window = 0;
};

// Replays a validated stream once, producing order records and the quote
// change-point series. Throws IntegrityError on events a validate_stream run
// would have flagged.
ReplayResult replay_stream(const EventStream& stream);

std::vector<OrderRecord> build_order_records(const EventStream& stream);

}  // namespace lob
