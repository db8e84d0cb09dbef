#include "gen.hpp"

#include "hapi/sampler/sampler.hpp"
#include "hapi/session/session.hpp"
#include "hapi/trace/reader.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace hapi;
using namespace hapi::sampler;
using schema::Counter;
using testgen::TempDir;

namespace
{
std::size_t idx(Counter c) { return static_cast<std::size_t>(c); }

struct Rig
{
    TempDir                             tmp;
    trace::VirtualClock                 clock;
    mock::MockRuntime                   rt{clock};
    std::unique_ptr<trace::TraceWriter> writer;
    trace::ThreadStream*                stream = nullptr;

    Rig()
    {
        trace::WriterOptions o;
        o.drain    = trace::DrainMode::manual;
        o.capacity = 1 << 14;
        o.hostname = "h";
        o.pid      = 7;
        writer     = trace::TraceWriter::open(tmp / "t", session::mock_registry(schema::Scenario::hybrid), clock, o);
        stream     = &writer->stream(7, 8);
    }

    std::vector<trace::EventRecord> finish()
    {
        writer->finalize();
        return trace::TraceReader(tmp / "t").read_all(0);
    }
};

/// Field `name` of a decoded record, via its schema.
const trace::FieldValue& field(const schema::SchemaRegistry& reg, const trace::EventRecord& r, std::string_view name)
{
    const auto& s = *reg.at(r.schema_id);
    for(std::size_t i = 0; i < s.fields.size(); ++i)
        if(s.fields[i].name == name) return r.payload.at(i);
    throw std::out_of_range(std::string(name));
}
}  // namespace

TEST(Counters, IdleDevice)
{
    trace::VirtualClock clock;
    mock::MockRuntime   rt(clock);
    const auto          v = sample_counters(rt, 0);
    // Two idle tiles at 50 W on top of the 20 W chip overhead.
    EXPECT_DOUBLE_EQ(v[idx(Counter::power_domain_0)], 120.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::power_domain_1)], 50.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::power_domain_2)], 50.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::frequency_domain_0)], 1600.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::frequency_domain_1)], 1600.0);
    for(auto c : {Counter::compute_engine_tile_0, Counter::compute_engine_tile_1, Counter::copy_engine_tile_0,
                  Counter::copy_engine_tile_1})
        EXPECT_DOUBLE_EQ(v[idx(c)], 0.0);
}

TEST(Counters, BusyEnginesRaisePower)
{
    trace::VirtualClock clock;
    mock::MockRuntime   rt(clock);
    ze_device_handle_t  dev = nullptr;
    ASSERT_EQ(rt.init(0, &dev), ZE_RESULT_SUCCESS);
    ze_command_list_handle_t l0 = nullptr, l1 = nullptr;
    rt.cmdlist_create(dev, 0, &l0);
    rt.cmdlist_create(dev, 1, &l1);
    void* h = nullptr;
    void* d = nullptr;
    rt.mem_alloc(dev, ZE_MEM_SPACE_HOST, 64, &h);
    rt.mem_alloc(dev, ZE_MEM_SPACE_DEVICE, 64, &d);
    rt.append_launch_kernel(l0, "k", 1000, nullptr);
    rt.append_memory_copy(l1, d, h, 1000000, nullptr, 0, nullptr);
    rt.cmdlist_close(l0);
    rt.cmdlist_close(l1);
    std::vector<codegen::ProfilingRecord> k, c;
    rt.cmdlist_execute(l0, &k);
    rt.cmdlist_execute(l1, &c);
    ASSERT_EQ(k.size(), 1u);
    ASSERT_EQ(c.size(), 1u);
    // The kernel runs 1 ms, the copy 1.002 ms; pick an instant inside both.
    const auto t = std::max(k[0].start_ns, c[0].start_ns) + 10;
    ASSERT_LT(t, std::min(k[0].end_ns, c[0].end_ns));

    TelemetryModel m;
    m.frequency_mhz = 1000.0;
    const auto v    = sample_counters(rt, t, m);
    EXPECT_DOUBLE_EQ(v[idx(Counter::compute_engine_tile_0)], 1.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::compute_engine_tile_1)], 0.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::copy_engine_tile_0)], 0.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::copy_engine_tile_1)], 1.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::power_domain_1)], 200.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::power_domain_2)], 80.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::power_domain_0)], 300.0);
    EXPECT_DOUBLE_EQ(v[idx(Counter::frequency_domain_1)], 1000.0);
}

TEST(Sampler, ZeroPeriodThrows)
{
    Rig r;
    EXPECT_THROW(Sampler(r.rt, *r.stream, 0), Error);
}

TEST(Sampler, AdvanceIsExclusiveFinishIsInclusive)
{
    Rig     r;
    Sampler s(r.rt, *r.stream, 100);
    EXPECT_THROW(s.advance_to(5), Error);
    s.start(1000);
    EXPECT_THROW(s.start(1000), Error);
    s.advance_to(1000);
    EXPECT_EQ(s.instants(), 0u);
    s.advance_to(1001);
    EXPECT_EQ(s.instants(), 1u);
    s.advance_to(1200);
    EXPECT_EQ(s.instants(), 2u);
    s.advance_to(1100);  // going back is a no-op
    EXPECT_EQ(s.instants(), 2u);
    EXPECT_EQ(s.finish(1200), 27u);
    EXPECT_EQ(s.instants(), 3u);

    const auto recs = r.finish();
    ASSERT_EQ(recs.size(), 1u + 27u);
    const auto& reg = r.writer->registry();
    EXPECT_EQ(reg.at(recs[0].schema_id)->name, schema::sampler_config_name);
    EXPECT_EQ(std::get<std::uint64_t>(field(reg, recs[0], "period_ns")), 100u);
    for(std::size_t i = 0; i < 27; ++i)
    {
        const auto& rec = recs[1 + i];
        EXPECT_EQ(rec.timestamp_ns, 1000 + 100 * (i / 9));
        EXPECT_EQ(reg.at(rec.schema_id)->name, schema::counter_schema_name(schema::all_counters[i % 9]));
    }
}

TEST(Sampler, ClosedWriterStopsTheSampler)
{
    Rig     r;
    Sampler s(r.rt, *r.stream, 10);
    s.start(0);
    r.writer->finalize();
    s.advance_to(100);
    EXPECT_TRUE(s.stopped());
    EXPECT_EQ(s.samples(), 0u);
}

TEST(Sampler, HalfSecondAtFiftyMillisecondsIsElevenInstants)
{
    TempDir    tmp;
    const auto w = workload::parse_workload("name: idle\nsteps:\n  - {call: host_compute, args: {ns: 500000000}}\n");
    session::TraceOptions o;
    o.sample = true;
    const auto res = session::trace_workload(w, tmp / "t", o);
    EXPECT_EQ(res.samples, 11u * 9u);

    trace::TraceReader reader(tmp / "t");
    std::map<std::uint64_t, std::set<std::string>> by_instant;
    for(std::size_t i = 0; i < reader.streams().size(); ++i)
        for(const auto& rec : reader.read_all(i))
        {
            const auto& s = *reader.registry().at(rec.schema_id);
            if(s.cls == schema::EventClass::telemetry_sample) by_instant[rec.timestamp_ns].insert(s.name);
        }
    ASSERT_EQ(by_instant.size(), 11u);
    std::uint64_t expect = 0;
    for(const auto& [t, names] : by_instant)
    {
        EXPECT_EQ(t, expect);
        EXPECT_EQ(names.size(), 9u);
        expect += 50'000'000;
    }
}

TEST(Sampler, UtilizationMatchesRecordedDeviceWork)
{
    TempDir               tmp;
    session::TraceOptions o;
    o.sample           = true;
    o.sample_period_ns = 997;  // coprime with every cost in the mock
    session::trace_workload(session::load_workload("W1"), tmp / "t", o);

    trace::TraceReader reader(tmp / "t");
    const auto&        reg = reader.registry();
    struct Window
    {
        std::uint64_t tile, start, end;
        bool          kernel;
    };
    std::vector<Window>                                  windows;
    std::vector<std::pair<std::uint64_t, trace::EventRecord>> compute, copy;
    for(std::size_t i = 0; i < reader.streams().size(); ++i)
        for(const auto& rec : reader.read_all(i))
        {
            const auto& s = *reg.at(rec.schema_id);
            if(s.cls == schema::EventClass::device_profiling)
                windows.push_back({std::get<std::uint64_t>(field(reg, rec, "tile")),
                                   std::get<std::uint64_t>(field(reg, rec, "device_start_ns")),
                                   std::get<std::uint64_t>(field(reg, rec, "device_end_ns")),
                                   std::get<std::string>(field(reg, rec, "command_kind")) == "kernel"});
            else if(s.name == schema::counter_schema_name(Counter::compute_engine_tile_0))
                compute.emplace_back(rec.timestamp_ns, rec);
            else if(s.name == schema::counter_schema_name(Counter::copy_engine_tile_0))
                copy.emplace_back(rec.timestamp_ns, rec);
        }
    ASSERT_FALSE(windows.empty());
    ASSERT_GT(compute.size(), 50u);

    auto busy = [&](bool kernel, std::uint64_t t) {
        return std::any_of(windows.begin(), windows.end(), [&](const Window& w) {
            return w.tile == 0 && w.kernel == kernel && w.start <= t && t < w.end;
        });
    };
    std::size_t busy_instants = 0;
    for(const auto& [t, rec] : compute)
    {
        const double v = std::get<double>(field(reg, rec, "value"));
        EXPECT_EQ(v, busy(true, t) ? 1.0 : 0.0) << "t=" << t;
        busy_instants += v == 1.0;
    }
    for(const auto& [t, rec] : copy)
        EXPECT_EQ(std::get<double>(field(reg, rec, "value")), busy(false, t) ? 1.0 : 0.0) << "t=" << t;
    EXPECT_GT(busy_instants, 0u);
}

TEST(WallSampler, SamplesUntilStopped)
{
    Rig r;
    r.writer.reset();
    trace::MonotonicClock wall;
    trace::WriterOptions  o;
    o.hostname = "h";
    o.pid      = 7;
    auto        w      = trace::TraceWriter::open(r.tmp / "w", session::mock_registry(schema::Scenario::hybrid), wall, o);
    auto&       stream = w->stream(7, 8);
    std::uint64_t n    = 0;
    {
        WallSampler s(r.rt, stream, 1'000'000);
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        n = s.stop();
        EXPECT_EQ(s.stop(), n);
    }
    EXPECT_GT(n, 0u);
    EXPECT_EQ(n % schema::counter_count, 0u);
    const auto streams = w->finalize();
    ASSERT_EQ(streams.size(), 1u);
    EXPECT_EQ(streams[0].event_count, n + 1);  // plus the config event
}
