#include "lob/events.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"

using namespace lob;

TEST(ParseEventLine, DecodesAddRecord) {
    const OrderEvent e = parse_event_line("1000,A,42,B,2340,100");
    EXPECT_EQ(e.timestamp_ms, 1000);
    EXPECT_EQ(e.kind, EventKind::ADD);
    EXPECT_EQ(e.order_id, 42u);
    EXPECT_EQ(e.side, Side::BUY);
    EXPECT_EQ(e.price_ticks, 2340);
    EXPECT_EQ(e.volume_shares, 100);
}

TEST(ParseEventLine, DecodesEveryKindCode) {
    EXPECT_EQ(parse_event_line("1,C,7,S,10,5").kind, EventKind::CANCEL);
    EXPECT_EQ(parse_event_line("1,X,7,S,10,5").kind, EventKind::CANCEL_PARTIAL);
    EXPECT_EQ(parse_event_line("1,E,7,S,10,5").kind, EventKind::EXECUTE);
    EXPECT_EQ(parse_event_line("1,P,7,S,10,5").kind, EventKind::EXECUTE_PARTIAL);
    EXPECT_EQ(parse_event_line("1,H,0,S,10,5").kind, EventKind::HIDDEN_TRADE);
}

TEST(ParseEventLine, RejectsNonPositivePrice) {
    EXPECT_THROW(parse_event_line("1000,A,42,B,0,100"), ParseError);
    EXPECT_THROW(parse_event_line("1000,A,42,B,-3,100"), ParseError);
}

TEST(ParseEventLine, RejectsMalformedRecords) {
    EXPECT_THROW(parse_event_line("1000,A,42,B,2340"), ParseError);          // field count
    EXPECT_THROW(parse_event_line("1000,A,42,B,2340,100,9"), ParseError);    // field count
    EXPECT_THROW(parse_event_line("x,A,42,B,2340,100"), ParseError);         // non-numeric
    EXPECT_THROW(parse_event_line("1000,Q,42,B,2340,100"), ParseError);      // kind code
    EXPECT_THROW(parse_event_line("1000,A,42,Z,2340,100"), ParseError);      // side code
    EXPECT_THROW(parse_event_line("1000,A,42,B,2340,0"), ParseError);        // volume
    EXPECT_THROW(parse_event_line("-5,A,42,B,2340,100"), ParseError);        // timestamp
    EXPECT_THROW(parse_event_line("1000,A,4 2,B,2340,100"), ParseError);     // embedded space
}

TEST(ParseEventLine, ErrorNamesLineAndField) {
    try {
        parse_event_line("1000,A,42,B,0,100", 17);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line_no, 17);
        EXPECT_EQ(e.field, "price_ticks");
        EXPECT_NE(std::string(e.what()).find("line 17"), std::string::npos);
    }
}

TEST(SerializeEventLine, FormatsCanonicalRecords) {
    EXPECT_EQ(serialize_event_line({1000, EventKind::ADD, 42, Side::BUY, 2340, 100}),
              "1000,A,42,B,2340,100");
    EXPECT_EQ(serialize_event_line({5, EventKind::HIDDEN_TRADE, 0, Side::SELL, 2341, 50}),
              "5,H,0,S,2341,50");
}

TEST(SerializeEventLine, RoundTripsFuzzedEvents) {
    lobtest::StreamGenOptions opt;
    opt.n_events = 10'000;
    opt.seed = 99;
    const EventStream stream = lobtest::random_valid_stream(opt);
    ASSERT_EQ(stream.events.size(), 10'000u);
    for (const OrderEvent& e : stream.events) {
        const std::string line = serialize_event_line(e);
        EXPECT_EQ(parse_event_line(line), e) << line;
    }
}

TEST(ValidateStream, EmptyStreamIsOk) {
    EventStream stream;
    stream.market_close_ms = 1;
    EXPECT_TRUE(validate_stream(stream).ok());
}

TEST(ValidateStream, FlagsUnknownOrderId) {
    EventStream stream = lobtest::make_stream(
        {{0, EventKind::ADD, 1, Side::BUY, 100, 10},
         {1, EventKind::CANCEL, 2, Side::BUY, 100, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0].event_index, 1u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::UNKNOWN_ORDER_ID);
}

TEST(ValidateStream, FlagsTimestampRegression) {
    EventStream stream = lobtest::make_stream(
        {{5, EventKind::ADD, 1, Side::BUY, 100, 10},
         {4, EventKind::CANCEL, 1, Side::BUY, 100, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::TIMESTAMP_REGRESSION);
}

TEST(ValidateStream, FlagsDuplicateAdd) {
    EventStream stream = lobtest::make_stream(
        {{0, EventKind::ADD, 1, Side::BUY, 100, 10},
         {1, EventKind::ADD, 1, Side::BUY, 101, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::DUPLICATE_ADD_ID);
}

TEST(ValidateStream, FlagsOversizedPartial) {
    EventStream stream = lobtest::make_stream(
        {{0, EventKind::ADD, 1, Side::BUY, 100, 10},
         {1, EventKind::EXECUTE_PARTIAL, 1, Side::BUY, 100, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::OVERSIZED_PARTIAL);
}

TEST(ValidateStream, FlagsSideAndPriceMismatch) {
    EventStream stream = lobtest::make_stream(
        {{0, EventKind::ADD, 1, Side::BUY, 100, 10},
         {1, EventKind::CANCEL, 1, Side::SELL, 100, 10},
         {2, EventKind::CANCEL, 1, Side::BUY, 101, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 2u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::SIDE_MISMATCH);
    EXPECT_EQ(report.violations[1].kind, ViolationKind::PRICE_MISMATCH);
}

TEST(ValidateStream, FlagsReservedIdMisuse) {
    EventStream stream = lobtest::make_stream(
        {{0, EventKind::ADD, 0, Side::BUY, 100, 10},
         {1, EventKind::HIDDEN_TRADE, 3, Side::BUY, 100, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 2u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::RESERVED_ID_MISUSE);
    EXPECT_EQ(report.violations[1].kind, ViolationKind::RESERVED_ID_MISUSE);
}

TEST(ValidateStream, AcceptsDeadIdReuseAsUnknown) {
    EventStream stream = lobtest::make_stream(
        {{0, EventKind::ADD, 1, Side::BUY, 100, 10},
         {1, EventKind::CANCEL, 1, Side::BUY, 100, 10},
         {2, EventKind::EXECUTE, 1, Side::BUY, 100, 10}},
        0, 10);
    const ValidationReport report = validate_stream(stream);
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0].kind, ViolationKind::UNKNOWN_ORDER_ID);
}

TEST(ValidateStream, AcceptsFuzzedValidStreams) {
    for (uint64_t seed : {1u, 2u, 3u}) {
        lobtest::StreamGenOptions opt;
        opt.n_events = 20'000;
        opt.seed = seed;
        EXPECT_TRUE(validate_stream(lobtest::random_valid_stream(opt)).ok());
    }
}

TEST(EventFile, RoundTripsBitExact) {
    lobtest::StreamGenOptions opt;
    opt.n_events = 5'000;
    opt.seed = 7;
    opt.market_close_ms = 20'000;
    const EventStream stream = lobtest::random_valid_stream(opt);

    const std::string path =
        (std::filesystem::temp_directory_path() / "lob_events_roundtrip.lob").string();
    write_event_file(stream, path);
    const EventStream reread = read_event_file(path);

    EXPECT_EQ(reread.tick_size_cents, stream.tick_size_cents);
    EXPECT_EQ(reread.market_open_ms, stream.market_open_ms);
    EXPECT_EQ(reread.market_close_ms, stream.market_close_ms);
    ASSERT_EQ(reread.events.size(), stream.events.size());
    EXPECT_EQ(reread.events, stream.events);

    // Writing the reread stream reproduces the file byte for byte.
    const std::string path2 = path + ".2";
    write_event_file(reread, path2);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    EXPECT_EQ(bytes_a, bytes_b);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST(EventFile, RejectsMissingHeader) {
    const std::string path =
        (std::filesystem::temp_directory_path() / "lob_events_noheader.lob").string();
    {
        std::ofstream out(path);
        out << "1000,A,42,B,2340,100\n";
    }
    EXPECT_THROW(read_event_file(path), ParseError);
    std::filesystem::remove(path);
}

TEST(EventFile, MissingFileIsIoError) {
    EXPECT_THROW(read_event_file("/nonexistent/path/events.lob"), IoError);
}
