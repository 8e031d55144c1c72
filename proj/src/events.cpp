#include "lob/events.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace lob {

namespace {

constexpr std::array<std::string_view, 6> kFieldNames = {
    "timestamp_ms", "kind", "order_id", "side", "price_ticks", "volume_shares",
};

template <typename Int>
Int parse_int(std::string_view text, int line_no, std::string_view field) {
    Int value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError(line_no, std::string(field), "not a valid integer: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

char kind_code(EventKind kind) {
    switch (kind) {
        case EventKind::ADD: return 'A';
        case EventKind::CANCEL: return 'C';
        case EventKind::CANCEL_PARTIAL: return 'X';
        case EventKind::EXECUTE: return 'E';
        case EventKind::EXECUTE_PARTIAL: return 'P';
        case EventKind::HIDDEN_TRADE: return 'H';
    }
    throw std::logic_error("unreachable kind");
}

char side_code(Side side) {
    return side == Side::BUY ? 'B' : 'S';
}

OrderEvent parse_event_line(std::string_view line, int line_no) {
    std::array<std::string_view, 6> fields;
    size_t pos = 0;
    for (size_t i = 0; i < fields.size(); ++i) {
        size_t comma = line.find(',', pos);
        if (i + 1 < fields.size()) {
            if (comma == std::string_view::npos) {
                throw ParseError(line_no, "record", "expected 6 comma-separated fields");
            }
            fields[i] = line.substr(pos, comma - pos);
            pos = comma + 1;
        } else {
            if (comma != std::string_view::npos) {
                throw ParseError(line_no, "record", "expected 6 comma-separated fields");
            }
            fields[i] = line.substr(pos);
        }
    }

    OrderEvent event;
    event.timestamp_ms = parse_int<int64_t>(fields[0], line_no, kFieldNames[0]);
    if (event.timestamp_ms < 0) {
        throw ParseError(line_no, std::string(kFieldNames[0]), "timestamp must be >= 0");
    }

    if (fields[1].size() != 1) {
        throw ParseError(line_no, std::string(kFieldNames[1]), "unknown kind code '" + std::string(fields[1]) + "'");
    }
    switch (fields[1][0]) {
        case 'A': event.kind = EventKind::ADD; break;
        case 'C': event.kind = EventKind::CANCEL; break;
        case 'X': event.kind = EventKind::CANCEL_PARTIAL; break;
        case 'E': event.kind = EventKind::EXECUTE; break;
        case 'P': event.kind = EventKind::EXECUTE_PARTIAL; break;
        case 'H': event.kind = EventKind::HIDDEN_TRADE; break;
        default:
            throw ParseError(line_no, std::string(kFieldNames[1]), "unknown kind code '" + std::string(fields[1]) + "'");
    }

    event.order_id = parse_int<uint64_t>(fields[2], line_no, kFieldNames[2]);

    if (fields[3].size() != 1 || (fields[3][0] != 'B' && fields[3][0] != 'S')) {
        throw ParseError(line_no, std::string(kFieldNames[3]), "unknown side code '" + std::string(fields[3]) + "'");
    }
    event.side = fields[3][0] == 'B' ? Side::BUY : Side::SELL;

    event.price_ticks = parse_int<int64_t>(fields[4], line_no, kFieldNames[4]);
    if (event.price_ticks <= 0) {
        throw ParseError(line_no, std::string(kFieldNames[4]), "price must be > 0");
    }

    event.volume_shares = parse_int<int64_t>(fields[5], line_no, kFieldNames[5]);
    if (event.volume_shares <= 0) {
        throw ParseError(line_no, std::string(kFieldNames[5]), "volume must be > 0");
    }

    return event;
}

std::string serialize_event_line(const OrderEvent& event) {
    std::string out;
    out.reserve(48);
    out += std::to_string(event.timestamp_ms);
    out += ',';
    out += kind_code(event.kind);
    out += ',';
    out += std::to_string(event.order_id);
    out += ',';
    out += side_code(event.side);
    out += ',';
    out += std::to_string(event.price_ticks);
    out += ',';
    out += std::to_string(event.volume_shares);
    return out;
}

namespace {

const char* violation_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::TIMESTAMP_REGRESSION: return "timestamp regression";
        case ViolationKind::UNKNOWN_ORDER_ID: return "unknown order_id";
        case ViolationKind::DUPLICATE_ADD_ID: return "duplicate ADD id";
        case ViolationKind::OVERSIZED_PARTIAL: return "partial volume >= remaining volume";
        case ViolationKind::SIDE_MISMATCH: return "side mismatch vs. ADD";
        case ViolationKind::PRICE_MISMATCH: return "price mismatch vs. ADD";
        case ViolationKind::RESERVED_ID_MISUSE: return "reserved order_id misuse";
    }
    return "unknown";
}

}  // namespace

std::string violation_to_string(const Violation& violation) {
    std::string out = "event " + std::to_string(violation.event_index) + ": ";
    out += violation_name(violation.kind);
    if (!violation.detail.empty()) {
        out += " (" + violation.detail + ")";
    }
    return out;
}

ValidationReport validate_stream(const EventStream& stream) {
    ValidationReport report;
    struct LiveOrder {
        Side side;
        int64_t price_ticks;
        int64_t remaining;
    };
    std::unordered_map<uint64_t, LiveOrder> live;
    live.reserve(stream.events.size() / 2 + 1);

    int64_t prev_ts = stream.session_start_ms;
    for (size_t i = 0; i < stream.events.size(); ++i) {
        const OrderEvent& e = stream.events[i];
        if (e.timestamp_ms < prev_ts) {
            report.violations.push_back({i, ViolationKind::TIMESTAMP_REGRESSION,
                                         std::to_string(e.timestamp_ms) + " after " + std::to_string(prev_ts)});
        }
        prev_ts = std::max(prev_ts, e.timestamp_ms);

        if (e.kind == EventKind::HIDDEN_TRADE) {
            if (e.order_id != 0) {
                report.violations.push_back({i, ViolationKind::RESERVED_ID_MISUSE,
                                             "HIDDEN_TRADE must carry order_id 0"});
            }
            continue;
        }
        if (e.order_id == 0) {
            report.violations.push_back({i, ViolationKind::RESERVED_ID_MISUSE,
                                         "order_id 0 is reserved for HIDDEN_TRADE"});
            continue;
        }

        if (e.kind == EventKind::ADD) {
            auto [it, inserted] = live.try_emplace(e.order_id, LiveOrder{e.side, e.price_ticks, e.volume_shares});
            if (!inserted) {
                report.violations.push_back({i, ViolationKind::DUPLICATE_ADD_ID,
                                             "id " + std::to_string(e.order_id)});
            }
            continue;
        }

        auto it = live.find(e.order_id);
        if (it == live.end()) {
            report.violations.push_back({i, ViolationKind::UNKNOWN_ORDER_ID,
                                         "id " + std::to_string(e.order_id)});
            continue;
        }
        LiveOrder& order = it->second;
        bool consistent = true;
        if (order.side != e.side) {
            report.violations.push_back({i, ViolationKind::SIDE_MISMATCH, "id " + std::to_string(e.order_id)});
            consistent = false;
        }
        if (order.price_ticks != e.price_ticks) {
            report.violations.push_back({i, ViolationKind::PRICE_MISMATCH, "id " + std::to_string(e.order_id)});
            consistent = false;
        }
        if (!consistent) {
            continue;
        }
        switch (e.kind) {
            case EventKind::CANCEL_PARTIAL:
            case EventKind::EXECUTE_PARTIAL:
                if (e.volume_shares >= order.remaining) {
                    report.violations.push_back({i, ViolationKind::OVERSIZED_PARTIAL,
                                                 std::to_string(e.volume_shares) + " of " +
                                                     std::to_string(order.remaining) + " remaining"});
                } else {
                    order.remaining -= e.volume_shares;
                }
                break;
            case EventKind::CANCEL:
            case EventKind::EXECUTE:
                live.erase(it);
                break;
            default:
                break;
        }
    }
    return report;
}

std::string format_stream_header(const EventStream& stream) {
    std::string out = "# lob-events v1 tick_cents=";
    out += std::to_string(stream.tick_size_cents);
    out += " open_ms=" + std::to_string(stream.market_open_ms);
    out += " close_ms=" + std::to_string(stream.market_close_ms);
    return out;
}

EventStream read_event_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open event file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(1, "header", "empty file");
    }

    EventStream stream;
    {
        long long tick = 0, open = 0, close = 0;
        if (std::sscanf(line.c_str(), "# lob-events v1 tick_cents=%lld open_ms=%lld close_ms=%lld",
                        &tick, &open, &close) != 3) {
            throw ParseError(1, "header", "expected '# lob-events v1 tick_cents=<n> open_ms=<n> close_ms=<n>'");
        }
        if (tick <= 0) {
            throw ParseError(1, "tick_cents", "must be > 0");
        }
        if (open < 0 || open >= close) {
            throw ParseError(1, "header", "need 0 <= open_ms < close_ms");
        }
        stream.tick_size_cents = tick;
        stream.market_open_ms = open;
        stream.market_close_ms = close;
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        stream.events.push_back(parse_event_line(line, line_no));
    }

    stream.session_start_ms = 0;
    stream.session_end_ms = stream.market_close_ms;
    if (!stream.events.empty()) {
        stream.session_end_ms = std::max(stream.session_end_ms, stream.events.back().timestamp_ms);
    }
    return stream;
}

void write_event_file(const EventStream& stream, const std::string& path) {
    // Atomic write: temp file in the target directory, then rename.
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw IoError("cannot open output file: " + tmp.string());
        }
        out << format_stream_header(stream) << '\n';
        for (const OrderEvent& e : stream.events) {
            out << serialize_event_line(e) << '\n';
        }
        out.flush();
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        throw IoError("rename failed: " + tmp.string() + " -> " + target.string() + ": " + ec.message());
    }
}

}  // namespace lob
