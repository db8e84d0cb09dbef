#include "gen.hpp"

#include "hapi/session/session.hpp"
#include "hapi/trace/hapi_writer.h"
#include "hapi/trace/metadata.hpp"
#include "hapi/trace/reader.hpp"
#include "hapi/trace/writer.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

using namespace hapi;
using namespace hapi::trace;
using testgen::Rng;
using testgen::TempDir;

namespace
{
/// Independent little-endian encoder for one value: the byte layout written
/// out by hand rather than through the codec.
void oracle_encode(const FieldValue& v, std::vector<std::uint8_t>& out)
{
    auto le = [&](std::uint64_t x, int n) {
        for(int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr(std::is_same_v<T, std::uint64_t>) le(x, 8);
            else if constexpr(std::is_same_v<T, std::int64_t>) le(static_cast<std::uint64_t>(x), 8);
            else if constexpr(std::is_same_v<T, double>) le(std::bit_cast<std::uint64_t>(x), 8);
            else if constexpr(std::is_same_v<T, Address>) le(x.value, 8);
            else
            {
                le(x.size(), 4);
                for(auto c : x) out.push_back(static_cast<std::uint8_t>(c));
            }
        },
        v);
}

schema::SchemaRegistry tiny_registry()
{
    schema::SchemaRegistry reg;
    reg.api_name = "t";
    schema::EventSchema a;
    a.id     = 0;
    a.name   = "t:a";
    a.fields = {{"x", schema::FieldKind::u64, schema::FieldOrigin::stack_arg}};
    a.modes  = schema::ModeMask::all();
    schema::EventSchema b = a;
    b.id                  = 1;
    b.name                = "t:full_only";
    b.modes               = {};
    b.modes.set(schema::TracingMode::full);
    reg.schemas = {a, b};
    return reg;
}

WriterOptions manual(std::size_t capacity = 1024, schema::TracingMode mode = schema::TracingMode::standard)
{
    WriterOptions o;
    o.drain    = DrainMode::manual;
    o.capacity = capacity;
    o.mode     = mode;
    o.hostname = "host0";
    o.pid      = 42;
    return o;
}

const FieldValue one[] = {std::uint64_t{1}};
}  // namespace

TEST(Codec, LittleEndianPrimitives)
{
    std::vector<std::uint8_t> b;
    put_u32(b, 0x01020304);
    put_u64(b, 0x1122334455667788ULL);
    EXPECT_EQ(b, (std::vector<std::uint8_t>{4, 3, 2, 1, 0x88, 0x77, 0x66, 0x55, 0x44, 0x33, 0x22, 0x11}));
    EXPECT_EQ(get_u32(b.data()), 0x01020304u);
    EXPECT_EQ(get_u64(b.data() + 4), 0x1122334455667788ULL);
}

TEST(Codec, RecordLayoutMatchesHandEncoding)
{
    Rng r(1);
    for(int i = 0; i < 500; ++i)
    {
        const auto reg = testgen::gen_registry(r, 4);
        const auto& s  = reg.schemas[r.between(0, 3)];
        const auto rec = testgen::gen_record(r, s, r.u64());
        std::vector<std::uint8_t> got;
        encode_record(s, rec, got);

        std::vector<std::uint8_t> payload;
        for(const auto& v : rec.payload) oracle_encode(v, payload);
        std::vector<std::uint8_t> want;
        put_u32(want, rec.schema_id);
        put_u64(want, rec.timestamp_ns);
        put_u32(want, static_cast<std::uint32_t>(payload.size()));
        want.insert(want.end(), payload.begin(), payload.end());
        ASSERT_EQ(got, want) << "case " << i;
    }
}

TEST(Codec, RoundTripProperty)
{
    Rng r(20240601);
    for(int i = 0; i < 10'000; ++i)
    {
        const auto reg = testgen::gen_registry(r, 3);
        const auto& s  = reg.schemas[r.between(0, 2)];
        const auto rec = testgen::gen_record(r, s, r.u64());
        std::vector<std::uint8_t> bytes;
        encode_record(s, rec, bytes);
        const auto d = decode_record(reg, bytes);
        ASSERT_EQ(d.size, bytes.size()) << "case " << i;
        ASSERT_TRUE(bitwise_equal(d.record, rec)) << "case " << i;
    }
}

TEST(Codec, BitwiseEqualityOnDoubles)
{
    const double nan = std::bit_cast<double>(0x7ff8000000000001ULL);
    EXPECT_TRUE(bitwise_equal(FieldValue{nan}, FieldValue{nan}));
    EXPECT_FALSE(bitwise_equal(FieldValue{0.0}, FieldValue{-0.0}));
    EXPECT_FALSE(bitwise_equal(FieldValue{std::uint64_t{1}}, FieldValue{Address{1}}));
}

TEST(Codec, RejectsMismatchedPayload)
{
    const auto reg = tiny_registry();
    std::vector<std::uint8_t> out{9};
    const EventRecord wrong_kind{0, 1, {Address{1}}};
    EXPECT_THROW(encode_record(reg.schemas[0], wrong_kind, out), TraceError);
    const EventRecord wrong_arity{0, 1, {}};
    EXPECT_THROW(encode_record(reg.schemas[0], wrong_arity, out), TraceError);
    EXPECT_EQ(out, std::vector<std::uint8_t>{9});  // untouched on error
}

TEST(Codec, TruncationReportsStreamAndOffset)
{
    const auto reg = tiny_registry();
    std::vector<std::uint8_t> bytes;
    encode_record(reg.schemas[0], EventRecord{0, 5, {std::uint64_t{7}}}, bytes);
    bytes.pop_back();
    try
    {
        decode_record(reg, bytes, "stream_1_1.bin", 100);
        FAIL() << "expected TraceError";
    } catch(const TraceError& e)
    {
        EXPECT_EQ(e.stream(), "stream_1_1.bin");
        EXPECT_GE(e.offset(), 100u);
    }
    std::vector<std::uint8_t> unknown;
    put_u32(unknown, 99);
    put_u64(unknown, 0);
    put_u32(unknown, 0);
    EXPECT_THROW(decode_record(reg, unknown), TraceError);
}

TEST(Codec, LengthPrefixBeyondPayloadRejected)
{
    schema::EventSchema s;
    s.fields = {{"s", schema::FieldKind::string, schema::FieldOrigin::stack_arg}};
    std::vector<std::uint8_t> bytes;
    put_u32(bytes, 1000);
    bytes.push_back('x');
    EXPECT_THROW(decode_payload(s, bytes), TraceError);
}

TEST(Writer, WritesReadableDirectory)
{
    TempDir     tmp;
    VirtualClock clock(10);
    auto        w = TraceWriter::open(tmp / "tr", tiny_registry(), clock, manual());
    auto&       s = w->stream(42, 43);
    EXPECT_EQ(s.emit(0, 5, one), EmitResult::written);
    EXPECT_EQ(s.emit(0, one), EmitResult::written);  // writer clock
    const auto streams = w->finalize();
    ASSERT_EQ(streams.size(), 1u);
    EXPECT_EQ(streams[0].file, "stream_42_43.bin");
    EXPECT_EQ(streams[0].event_count, 2u);
    EXPECT_EQ(streams[0].id, (StreamId{"host0", 42, 43}));

    // Header: magic, version, reserved.
    std::ifstream in(tmp / "tr" / "stream_42_43.bin", std::ios::binary);
    std::uint8_t  hdr[16];
    in.read(reinterpret_cast<char*>(hdr), 16);
    EXPECT_EQ(get_u32(hdr), trace_magic);
    EXPECT_EQ(get_u32(hdr + 4), trace_format_version);

    TraceReader reader(tmp / "tr");
    EXPECT_TRUE(reader.metadata().complete);
    EXPECT_EQ(reader.metadata().clock, "virtual");
    EXPECT_EQ(reader.registry(), tiny_registry());
    const auto recs = reader.read_all(0);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].timestamp_ns, 5u);
    EXPECT_EQ(recs[1].timestamp_ns, 10u);
}

TEST(Writer, RefusesNonEmptyDirectory)
{
    TempDir tmp;
    std::ofstream(tmp / "junk") << "x";
    VirtualClock clock;
    EXPECT_THROW(TraceWriter::open(tmp.path(), tiny_registry(), clock, manual()), TraceError);
}

TEST(Writer, ModeFilterLeavesCountsAlone)
{
    TempDir      tmp;
    VirtualClock clock;
    auto         w = TraceWriter::open(tmp / "tr", tiny_registry(), clock, manual());
    auto&        s = w->stream(1, 1);
    EXPECT_FALSE(s.enabled(1));
    EXPECT_EQ(s.emit(1, 0, one), EmitResult::filtered);
    EXPECT_EQ(s.event_count(), 0u);
    EXPECT_EQ(s.dropped_count(), 0u);
    EXPECT_THROW(s.emit(7, 0, one), TraceError);
}

TEST(Writer, DropsInsteadOfBlocking)
{
    TempDir      tmp;
    VirtualClock clock;
    auto         w = TraceWriter::open(tmp / "tr", tiny_registry(), clock, manual(2));
    auto&        s = w->stream(1, 1);
    std::uint64_t written = 0;
    for(int i = 0; i < 10; ++i) written += s.emit(0, i, one) == EmitResult::written;
    EXPECT_EQ(written, 2u);
    EXPECT_EQ(s.dropped_count(), 8u);
    w->drain();
    EXPECT_EQ(s.emit(0, 11, one), EmitResult::written);
    const auto streams = w->finalize();
    EXPECT_EQ(streams[0].event_count, 3u);
    EXPECT_EQ(streams[0].dropped_count, 8u);
    EXPECT_EQ(TraceReader(tmp / "tr").read_all(0).size(), 3u);
}

TEST(Writer, ClosedWriterRejectsEmits)
{
    TempDir      tmp;
    VirtualClock clock;
    auto         w = TraceWriter::open(tmp / "tr", tiny_registry(), clock, manual());
    auto&        s = w->stream(1, 1);
    w->finalize();
    EXPECT_TRUE(w->closed());
    EXPECT_THROW(s.emit(0, 0, one), WriterClosed);
    EXPECT_THROW(w->stream(1, 2), WriterClosed);
    EXPECT_NO_THROW(w->finalize());
}

TEST(Writer, BackgroundDrainerKeepsUpAcrossThreads)
{
    TempDir      tmp;
    VirtualClock clock;
    WriterOptions o = manual(64);
    o.drain         = DrainMode::background;
    auto w          = TraceWriter::open(tmp / "tr", tiny_registry(), clock, o);
    std::vector<std::jthread> threads;
    for(std::uint64_t t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            auto& s = w->stream(1, 100 + t);
            for(std::uint64_t i = 0; i < 5000; ++i)
                while(s.emit(0, i, one) == EmitResult::dropped) std::this_thread::yield();
        });
    threads.clear();
    const auto streams = w->finalize();
    ASSERT_EQ(streams.size(), 4u);
    for(const auto& s : streams) EXPECT_EQ(s.event_count, 5000u);
    TraceReader reader(tmp / "tr");
    for(std::size_t i = 0; i < 4; ++i)
    {
        const auto recs = reader.read_all(i);
        ASSERT_EQ(recs.size(), 5000u);
        for(std::size_t k = 0; k < recs.size(); ++k) ASSERT_EQ(recs[k].timestamp_ns, k);
    }
}

TEST(Writer, CapacityFromEnvironment)
{
    ::setenv("HAPITRACE_BUFFER_CAP", "17", 1);
    EXPECT_EQ(buffer_capacity_from_env(5), 17u);
    ::setenv("HAPITRACE_BUFFER_CAP", "x", 1);
    EXPECT_EQ(buffer_capacity_from_env(5), 5u);
    ::setenv("HAPITRACE_BUFFER_CAP", "0", 1);
    EXPECT_EQ(buffer_capacity_from_env(5), 5u);
    ::unsetenv("HAPITRACE_BUFFER_CAP");
    EXPECT_EQ(buffer_capacity_from_env(5), 5u);
}

TEST(Reader, CorruptStreamNamesFileAndOffset)
{
    TempDir      tmp;
    VirtualClock clock;
    auto         w = TraceWriter::open(tmp / "tr", tiny_registry(), clock, manual());
    w->stream(1, 1).emit(0, 0, one);
    w->stream(1, 1).emit(0, 1, one);
    w->finalize();
    const auto file = tmp / "tr" / "stream_1_1.bin";
    std::filesystem::resize_file(file, std::filesystem::file_size(file) - 3);
    TraceReader reader(tmp / "tr");
    try
    {
        reader.read_all(0);
        FAIL() << "expected TraceError";
    } catch(const TraceError& e)
    {
        EXPECT_NE(e.stream().find("stream_1_1.bin"), std::string::npos);
        EXPECT_EQ(e.offset(), stream_header_size + record_header_size + 8);
    }
}

TEST(Reader, MissingMetadataIsAnError)
{
    TempDir tmp;
    EXPECT_THROW(TraceReader{tmp.path()}, TraceError);
}

TEST(Metadata, JsonRoundTrip)
{
    TraceMetadata m;
    m.mode            = schema::TracingMode::full;
    m.clock           = "virtual";
    m.hostname        = "h";
    m.pid             = 9;
    m.buffer_capacity = 3;
    m.created_at      = "2024-01-01T00:00:00Z";
    m.complete        = true;
    m.registry        = tiny_registry();
    m.streams         = {StreamInfo{{"h", 9, 10}, "stream_9_10.bin", 4, 1}};
    const auto back   = metadata_from_json(metadata_to_json(m));
    EXPECT_EQ(back.mode, m.mode);
    EXPECT_EQ(back.registry, m.registry);
    EXPECT_EQ(back.streams, m.streams);
    EXPECT_EQ(back.complete, true);
}

TEST(CBinding, FiveFunctionRoundTrip)
{
    TempDir    tmp;
    const auto reg  = tiny_registry();
    const auto json = schema::registry_to_json(reg);
    const auto dir  = (tmp / "c").string();

    EXPECT_EQ(hapi_writer_open(dir.c_str(), json.c_str(), "sideways"), nullptr);
    hapi_writer* w = hapi_writer_open(dir.c_str(), json.c_str(), "default");
    ASSERT_NE(w, nullptr);
    hapi_stream* s = hapi_writer_acquire_stream(w);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(hapi_writer_acquire_stream(w), s);  // same thread, same stream

    std::uint8_t payload[8];
    std::vector<std::uint8_t> enc;
    put_u64(enc, 0xabcdef);
    std::memcpy(payload, enc.data(), 8);
    const auto t0 = hapi_writer_clock_ns(w);
    EXPECT_EQ(hapi_writer_emit(s, 0, t0, payload, 8), HAPI_EMIT_WRITTEN);
    EXPECT_EQ(hapi_writer_emit(s, 1, t0, payload, 8), HAPI_EMIT_FILTERED);
    EXPECT_EQ(hapi_writer_emit(s, 0, t0, payload, 7), HAPI_EMIT_ERROR);
    EXPECT_EQ(hapi_writer_emit(s, 5, t0, payload, 8), HAPI_EMIT_ERROR);
    EXPECT_EQ(hapi_writer_emit(nullptr, 0, t0, payload, 8), HAPI_EMIT_ERROR);
    EXPECT_GE(hapi_writer_clock_ns(w), t0);
    EXPECT_EQ(hapi_writer_close(w), 0);

    TraceReader reader(dir);
    EXPECT_EQ(reader.metadata().clock, "monotonic-wall");
    ASSERT_EQ(reader.streams().size(), 1u);
    const auto recs = reader.read_all(0);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(std::get<std::uint64_t>(recs[0].payload[0]), 0xabcdefu);
}

TEST(CBinding, DropsReportedAsDropped)
{
    TempDir tmp;
    ::setenv("HAPITRACE_BUFFER_CAP", "1", 1);
    const auto json = schema::registry_to_json(tiny_registry());
    const auto dir  = (tmp / "c").string();
    hapi_writer* w  = hapi_writer_open(dir.c_str(), json.c_str(), "full");
    ::unsetenv("HAPITRACE_BUFFER_CAP");
    ASSERT_NE(w, nullptr);
    hapi_stream*          s = hapi_writer_acquire_stream(w);
    std::vector<std::uint8_t> enc;
    put_u64(enc, 1);
    int dropped = 0;
    for(int i = 0; i < 1000; ++i) dropped += hapi_writer_emit(s, 0, 0, enc.data(), 8) == HAPI_EMIT_DROPPED;
    EXPECT_EQ(hapi_writer_close(w), 0);
    const auto info = TraceReader(dir).streams().at(0);
    EXPECT_EQ(info.dropped_count, static_cast<std::uint64_t>(dropped));
    EXPECT_EQ(info.event_count + info.dropped_count, 1000u);
}
