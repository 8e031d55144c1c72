#include "lob/replay.hpp"

#include <algorithm>
#include <unordered_map>

namespace lob {

const QuoteSeries::Entry* QuoteSeries::at_or_before(int64_t t) const {
    auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                               [](int64_t value, const Entry& e) { return value < e.timestamp_ms; });
    if (it == entries_.begin()) {
        return nullptr;
    }
    return &*std::prev(it);
}

std::optional<int64_t> QuoteSeries::midpoint_half_at(int64_t t) const {
    const Entry* e = at_or_before(t);
    if (e == nullptr || !e->valid) {
        return std::nullopt;
    }
    return e->midpoint_half_ticks();
}

ReplayResult replay_stream(const EventStream& stream) {
    ReplayResult result;
    BookState& book = result.final_book;

    std::unordered_map<uint64_t, size_t> record_index;
    record_index.reserve(stream.events.size() / 2 + 1);

    bool have_quote = false;
    int64_t cur_bid = 0;
    int64_t cur_ask = 0;
    bool have_counted_pair = false;
    int64_t counted_bid = 0;
    int64_t counted_ask = 0;

    auto on_state_change = [&](int64_t ts) {
        auto bid = book.best_bid_ticks();
        auto ask = book.best_ask_ticks();
        if (bid && ask) {
            if (have_quote && cur_bid == *bid && cur_ask == *ask) {
                return;
            }
            result.quotes.push({ts, true, *bid, *ask});
            if (have_counted_pair && (counted_bid != *bid || counted_ask != *ask) &&
                ts >= stream.market_open_ms && ts <= stream.market_close_ms) {
                ++result.quote_changes_in_window;
            }
            have_counted_pair = true;
            counted_bid = *bid;
            counted_ask = *ask;
            have_quote = true;
            cur_bid = *bid;
            cur_ask = *ask;
        } else {
            if (!have_quote) {
                return;
            }
            result.quotes.push({ts, false, 0, 0});
            have_quote = false;
        }
    };

    for (const OrderEvent& event : stream.events) {
        if (event.kind == EventKind::ADD) {
            OrderRecord record;
            record.order_id = event.order_id;
            record.side = event.side;
            record.price_ticks = event.price_ticks;
            record.insertion_time_ms = event.timestamp_ms;
            record.initial_volume = event.volume_shares;
            if (have_quote) {
                const int64_t mid_half = cur_bid + cur_ask;
                record.midpoint_at_insertion_half_ticks = mid_half;
                record.opposite_best_at_insertion_ticks = event.side == Side::BUY ? cur_ask : cur_bid;
                // Sign convention: positive beyond the midpoint on the
                // order's own side, negative when crossing it.
                const double mid_ticks = static_cast<double>(mid_half) / 2.0;
                const double diff = event.side == Side::SELL
                                        ? static_cast<double>(event.price_ticks) - mid_ticks
                                        : mid_ticks - static_cast<double>(event.price_ticks);
                record.relative_insertion_price = diff / mid_ticks;
            }
            record_index.emplace(event.order_id, result.records.size());
            result.records.push_back(record);
        }

        book.apply_event(event);

        // Partials are strictly below the remaining volume, so a life ends
        // only at a full CANCEL/EXECUTE.
        if (event.kind == EventKind::CANCEL || event.kind == EventKind::EXECUTE) {
            auto it = record_index.find(event.order_id);
            if (it != record_index.end()) {
                OrderRecord& record = result.records[it->second];
                record.removal_time_ms = event.timestamp_ms;
                record.lifetime_ms = event.timestamp_ms - record.insertion_time_ms;
            }
        }

        if (event.kind != EventKind::HIDDEN_TRADE) {
            on_state_change(event.timestamp_ms);
        }
    }

    for (OrderRecord& record : result.records) {
        if (!record.removal_time_ms.has_value()) {
            record.censored = true;
            record.lifetime_ms = stream.session_end_ms - record.insertion_time_ms;
        }
    }
    return result;
}

std::vector<OrderRecord> build_order_records(const EventStream& stream) {
    return replay_stream(stream).records;
}

}  // namespace lob
