#include "lob/book.hpp"

#include <algorithm>

namespace lob {

namespace {

std::string describe(const OrderEvent& event) {
    return "event '" + serialize_event_line(event) + "'";
}

}  // namespace

void BookState::apply_event(const OrderEvent& event) {
    switch (event.kind) {
        case EventKind::HIDDEN_TRADE:
            return;
        case EventKind::ADD: {
            if (event.order_id == 0) {
                throw IntegrityError("order_id 0 is reserved: " + describe(event));
            }
            auto [it, inserted] = live_.try_emplace(
                event.order_id,
                LiveOrder{event.side, event.price_ticks, event.volume_shares, event.timestamp_ms});
            if (!inserted) {
                throw IntegrityError("duplicate ADD id: " + describe(event));
            }
            auto& levels = event.side == Side::BUY ? bids_ : asks_;
            Level& level = levels[event.price_ticks];
            level.queue.push_back({event.order_id, event.volume_shares});
            level.total_volume += event.volume_shares;
            return;
        }
        case EventKind::CANCEL:
        case EventKind::EXECUTE:
            remove_volume(event, /*full_removal=*/true);
            return;
        case EventKind::CANCEL_PARTIAL:
        case EventKind::EXECUTE_PARTIAL:
            remove_volume(event, /*full_removal=*/false);
            return;
    }
}

void BookState::remove_volume(const OrderEvent& event, bool full_removal) {
    auto it = live_.find(event.order_id);
    if (it == live_.end()) {
        throw IntegrityError("unknown order_id: " + describe(event));
    }
    LiveOrder& order = it->second;
    if (order.side != event.side) {
        throw IntegrityError("side mismatch vs. ADD: " + describe(event));
    }
    if (order.price_ticks != event.price_ticks) {
        throw IntegrityError("price mismatch vs. ADD: " + describe(event));
    }
    if (!full_removal && event.volume_shares >= order.remaining) {
        throw IntegrityError("partial volume >= remaining volume: " + describe(event));
    }

    auto& levels = order.side == Side::BUY ? bids_ : asks_;
    auto level_it = levels.find(order.price_ticks);
    if (level_it == levels.end()) {
        throw IntegrityError("internal: live order without level: " + describe(event));
    }
    Level& level = level_it->second;
    auto queue_it = std::find_if(level.queue.begin(), level.queue.end(),
                                 [&](const RestingOrder& r) { return r.order_id == event.order_id; });
    if (queue_it == level.queue.end()) {
        throw IntegrityError("internal: live order missing from queue: " + describe(event));
    }

    if (full_removal) {
        level.total_volume -= queue_it->remaining;
        level.queue.erase(queue_it);
        live_.erase(it);
    } else {
        queue_it->remaining -= event.volume_shares;
        level.total_volume -= event.volume_shares;
        order.remaining -= event.volume_shares;
    }
    if (level.queue.empty()) {
        levels.erase(level_it);
    }
}

std::optional<int64_t> BookState::best_bid_ticks() const {
    if (bids_.empty()) {
        return std::nullopt;
    }
    return bids_.rbegin()->first;
}

std::optional<int64_t> BookState::best_ask_ticks() const {
    if (asks_.empty()) {
        return std::nullopt;
    }
    return asks_.begin()->first;
}

std::optional<QuoteSnapshot> BookState::quote(int64_t timestamp_ms) const {
    auto bid = best_bid_ticks();
    auto ask = best_ask_ticks();
    if (!bid || !ask) {
        return std::nullopt;
    }
    QuoteSnapshot snap;
    snap.timestamp_ms = timestamp_ms;
    snap.best_bid_ticks = *bid;
    snap.best_ask_ticks = *ask;
    snap.spread_ticks = *ask - *bid;
    snap.midpoint_half_ticks = *ask + *bid;
    return snap;
}

int64_t BookState::volume_at(int64_t price_ticks) const {
    int64_t total = 0;
    if (auto it = bids_.find(price_ticks); it != bids_.end()) {
        total += it->second.total_volume;
    }
    if (auto it = asks_.find(price_ticks); it != asks_.end()) {
        total += it->second.total_volume;
    }
    return total;
}

int64_t BookState::order_count_at(int64_t price_ticks) const {
    int64_t count = 0;
    if (auto it = bids_.find(price_ticks); it != bids_.end()) {
        count += static_cast<int64_t>(it->second.queue.size());
    }
    if (auto it = asks_.find(price_ticks); it != asks_.end()) {
        count += static_cast<int64_t>(it->second.queue.size());
    }
    return count;
}

std::vector<DepthEntry> BookState::depth_snapshot(int64_t center_half_ticks,
                                                  int64_t half_window_ticks) const {
    // A tick p is inside the window iff |2p - center| <= 2 * half_window.
    std::vector<DepthEntry> out;
    const int64_t lo_half = center_half_ticks - 2 * half_window_ticks;
    const int64_t hi_half = center_half_ticks + 2 * half_window_ticks;
    // Smallest tick with 2p >= lo_half; truncation toward zero makes a/2 the
    // ceiling for negative a.
    const int64_t lo_tick = lo_half >= 0 ? (lo_half + 1) / 2 : lo_half / 2;
    auto scan = [&](const std::map<int64_t, Level>& levels, Side side) {
        for (auto it = levels.lower_bound(lo_tick); it != levels.end() && 2 * it->first <= hi_half; ++it) {
            out.push_back({2 * it->first - center_half_ticks, side, it->second.total_volume,
                           static_cast<int64_t>(it->second.queue.size())});
        }
    };
    scan(bids_, Side::BUY);
    scan(asks_, Side::SELL);
    std::sort(out.begin(), out.end(), [](const DepthEntry& a, const DepthEntry& b) {
        return a.p_rel_half_ticks < b.p_rel_half_ticks;
    });
    return out;
}

}  // namespace lob
