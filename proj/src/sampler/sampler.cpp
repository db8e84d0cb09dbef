#include "hapi/sampler/sampler.hpp"

#include "hapi/error.hpp"

#include <condition_variable>
#include <mutex>

namespace hapi::sampler
{
namespace
{
using schema::Counter;
using ids_t = std::array<std::uint32_t, schema::counter_count>;

std::uint32_t require_schema(const trace::ThreadStream& stream, std::string_view name)
{
    const auto* s = stream.writer().registry().find(name);
    if(!s) throw Error("sampler: registry has no schema '" + std::string(name) + "'");
    return s->id;
}

ids_t counter_ids(const trace::ThreadStream& stream)
{
    ids_t ids{};
    for(std::size_t i = 0; i < schema::counter_count; ++i)
        ids[i] = require_schema(stream, schema::counter_schema_name(schema::all_counters[i]));
    return ids;
}

void emit_config(trace::ThreadStream& s, std::uint32_t id, std::uint64_t ts, std::uint64_t device,
                 std::uint64_t period)
{
    const trace::FieldValue payload[] = {device, period, std::uint64_t{mock::tile_count}};
    s.emit(id, ts, payload);
}

/// Writes one counter set. Returns the number of samples written.
std::uint64_t emit_counters(trace::ThreadStream& s, const ids_t& ids, std::uint64_t ts,
                            std::uint64_t device, const CounterValues& values)
{
    std::uint64_t n = 0;
    for(std::size_t i = 0; i < values.size(); ++i)
    {
        const trace::FieldValue payload[] = {device, values[i]};
        if(s.emit(ids[i], ts, payload) == trace::EmitResult::written) ++n;
    }
    return n;
}
}  // namespace

CounterValues sample_counters(const mock::MockRuntime& runtime, std::uint64_t t,
                              const TelemetryModel& model)
{
    CounterValues v{};
    double        chip = model.overhead_watts;
    for(unsigned tile = 0; tile < mock::tile_count; ++tile)
    {
        const double compute = runtime.busy(tile, mock::Engine::compute, t) ? 1.0 : 0.0;
        const double copy    = runtime.busy(tile, mock::Engine::copy, t) ? 1.0 : 0.0;
        const double power   = model.idle_watts + model.compute_watts * compute + model.copy_watts * copy;
        chip += power;
        v[std::size_t(Counter::power_domain_1) + tile]        = power;
        v[std::size_t(Counter::frequency_domain_0) + tile]    = model.frequency_mhz;
        v[std::size_t(Counter::compute_engine_tile_0) + tile] = compute;
        v[std::size_t(Counter::copy_engine_tile_0) + tile]    = copy;
    }
    v[std::size_t(Counter::power_domain_0)] = chip;
    return v;
}

Sampler::Sampler(const mock::MockRuntime& runtime, trace::ThreadStream& stream, std::uint64_t period_ns,
                 std::uint64_t device, TelemetryModel model)
: m_runtime(runtime), m_stream(stream), m_period(period_ns), m_device(device), m_model(model)
{
    if(period_ns == 0) throw Error("sampler: period must be positive");
    m_config_id = require_schema(stream, schema::sampler_config_name);
    m_ids       = counter_ids(stream);
}

void Sampler::start(std::uint64_t t0)
{
    if(m_started) throw Error("sampler: already started");
    m_started = true;
    m_next    = t0;
    try
    {
        emit_config(m_stream, m_config_id, t0, m_device, m_period);
    } catch(const trace::WriterClosed&)
    {
        m_stopped = true;
    }
}

bool Sampler::emit_instant(std::uint64_t t)
{
    try
    {
        m_samples += emit_counters(m_stream, m_ids, t, m_device, sample_counters(m_runtime, t, m_model));
        ++m_instants;
        return true;
    } catch(const trace::WriterClosed&)
    {
        m_stopped = true;
        return false;
    }
}

void Sampler::advance_to(std::uint64_t now)
{
    if(!m_started) throw Error("sampler: not started");
    while(!m_stopped && m_next < now)
    {
        if(!emit_instant(m_next)) break;
        m_next += m_period;
    }
}

std::uint64_t Sampler::finish(std::uint64_t end)
{
    advance_to(end);
    if(!m_stopped && m_next == end && emit_instant(m_next)) m_next += m_period;
    return m_samples;
}

WallSampler::WallSampler(const mock::MockRuntime& runtime, trace::ThreadStream& stream,
                         std::uint64_t period_ns, std::uint64_t device)
: m_runtime(runtime), m_stream(stream), m_period(period_ns), m_device(device)
{
    if(period_ns == 0) throw Error("sampler: period must be positive");
    m_config_id = require_schema(stream, schema::sampler_config_name);
    m_ids       = counter_ids(stream);
    m_thread    = std::jthread([this](std::stop_token st) { run(st); });
}

WallSampler::~WallSampler() { stop(); }

std::uint64_t WallSampler::stop()
{
    if(m_thread.joinable())
    {
        m_thread.request_stop();
        m_thread.join();
    }
    return m_samples.load();
}

void WallSampler::run(std::stop_token stop)
{
    const auto&                 clock = m_stream.writer().clock();
    std::mutex                  mutex;
    std::condition_variable_any cv;
    std::unique_lock            lk(mutex);
    try
    {
        emit_config(m_stream, m_config_id, clock.now_ns(), m_device, m_period);
        while(!stop.stop_requested())
        {
            const auto values = sample_counters(m_runtime, m_runtime.clock().now_ns());
            m_samples += emit_counters(m_stream, m_ids, clock.now_ns(), m_device, values);
            cv.wait_for(lk, stop, std::chrono::nanoseconds(m_period), [] { return false; });
        }
    } catch(const trace::WriterClosed&)
    {
        // Partial count stands.
    }
}
}  // namespace hapi::sampler
