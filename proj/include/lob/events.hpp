#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lob {

enum class Side : uint8_t { BUY, SELL };

// Kind codes on the wire: A, C, X, E, P, H (same order as the enumerators).
enum class EventKind : uint8_t {
    ADD,
    CANCEL,
    CANCEL_PARTIAL,
    EXECUTE,
    EXECUTE_PARTIAL,
    HIDDEN_TRADE,
};

char kind_code(EventKind kind);
char side_code(Side side);

// One atomic book change. Prices are integer ticks, volumes integer shares,
// timestamps integer milliseconds since session start. order_id 0 is
// reserved for HIDDEN_TRADE events, which reference no resting order.
struct OrderEvent {
    int64_t timestamp_ms = 0;
    EventKind kind = EventKind::ADD;
    uint64_t order_id = 0;
    Side side = Side::BUY;
    int64_t price_ticks = 0;
    int64_t volume_shares = 0;

    bool operator==(const OrderEvent&) const = default;
};

struct EventStream {
    std::vector<OrderEvent> events;
    int64_t session_start_ms = 0;
    int64_t session_end_ms = 0;
    int64_t market_open_ms = 0;
    int64_t market_close_ms = 0;
    int64_t tick_size_cents = 1;
};

struct ParseError : std::runtime_error {
    ParseError(int line_no_, std::string field_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_no_) + ", field '" + field_ +
                             "': " + what_),
          line_no(line_no_),
          field(std::move(field_)) {}

    int line_no;
    std::string field;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Decodes one comma-separated record `timestamp_ms,kind,order_id,side,price,volume`.
// Throws ParseError (carrying line_no) on malformed input.
OrderEvent parse_event_line(std::string_view line, int line_no = 0);

// Inverse of parse_event_line on valid events.
std::string serialize_event_line(const OrderEvent& event);

// Stream-level integrity checks. Violations are data, not failures.
enum class ViolationKind : uint8_t {
    TIMESTAMP_REGRESSION,
    UNKNOWN_ORDER_ID,
    DUPLICATE_ADD_ID,
    OVERSIZED_PARTIAL,
    SIDE_MISMATCH,
    PRICE_MISMATCH,
    RESERVED_ID_MISUSE,
};

struct Violation {
    size_t event_index;
    ViolationKind kind;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_stream(const EventStream& stream);

std::string violation_to_string(const Violation& violation);

// Event file I/O. Format: one header line
//   # lob-events v1 tick_cents=<n> open_ms=<n> close_ms=<n>
// followed by one serialized event per line. Round trips are bit-exact.
EventStream read_event_file(const std::string& path);
void write_event_file(const EventStream& stream, const std::string& path);

std::string format_stream_header(const EventStream& stream);

}  // namespace lob
