#pragma once

#include "hapi/mock/runtime.hpp"
#include "hapi/schema/schema.hpp"
#include "hapi/trace/writer.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>

namespace hapi::sampler
{
inline constexpr std::uint64_t default_period_ns = 50'000'000;

/// Synthetic counter model. Utilization at an instant is 1 when a command
/// occupies the engine then, else 0.
struct TelemetryModel
{
    double idle_watts      = 50.0;   // per tile
    double compute_watts   = 150.0;  // per tile at full compute utilization
    double copy_watts      = 30.0;   // per tile at full copy utilization
    double overhead_watts  = 20.0;   // chip domain on top of the tiles
    double frequency_mhz   = 1600.0;
};

using CounterValues = std::array<double, schema::counter_count>;

/// The nine counters at virtual instant `t`, in schema::all_counters order.
CounterValues sample_counters(const mock::MockRuntime& runtime, std::uint64_t t,
                              const TelemetryModel& model = {});

/// Virtual-clock sampler. The owner interleaves it with the workload by
/// calling advance_to() as the clock moves; instants are t0, t0 + p, ...
class Sampler
{
public:
    /// Throws Error when period_ns is 0.
    Sampler(const mock::MockRuntime& runtime, trace::ThreadStream& stream,
            std::uint64_t period_ns = default_period_ns, std::uint64_t device = 0,
            TelemetryModel model = {});

    /// Emits the configuration event and fixes t0. Call once.
    void start(std::uint64_t t0);
    /// Emits every instant strictly before `now`.
    void advance_to(std::uint64_t now);
    /// Emits every remaining instant up to and including `end`. Returns the
    /// number of telemetry samples written so far.
    std::uint64_t finish(std::uint64_t end);

    std::uint64_t instants() const noexcept { return m_instants; }
    std::uint64_t samples() const noexcept { return m_samples; }
    bool          stopped() const noexcept { return m_stopped; }

private:
    /// Emits one instant. False once the writer has closed.
    bool emit_instant(std::uint64_t t);

    const mock::MockRuntime& m_runtime;
    trace::ThreadStream&     m_stream;
    std::uint64_t            m_period;
    std::uint64_t            m_device;
    TelemetryModel           m_model;
    std::uint32_t            m_config_id = 0;
    std::array<std::uint32_t, schema::counter_count> m_ids{};
    std::uint64_t            m_next      = 0;
    std::uint64_t            m_instants  = 0;
    std::uint64_t            m_samples   = 0;
    bool                     m_started   = false;
    bool                     m_stopped   = false;
};

/// Wall-clock sampler: a background thread that samples every period until
/// stop(). Timestamps come from the writer's clock; counter values from the
/// runtime's virtual device state at its current virtual time.
class WallSampler
{
public:
    WallSampler(const mock::MockRuntime& runtime, trace::ThreadStream& stream,
                std::uint64_t period_ns = default_period_ns, std::uint64_t device = 0);
    ~WallSampler();

    /// Stops and joins; returns the number of samples written.
    std::uint64_t stop();

private:
    void run(std::stop_token stop);

    const mock::MockRuntime&                         m_runtime;
    trace::ThreadStream&                             m_stream;
    std::uint64_t                                    m_period;
    std::uint64_t                                    m_device;
    std::uint32_t                                    m_config_id = 0;
    std::array<std::uint32_t, schema::counter_count> m_ids{};
    std::atomic<std::uint64_t>                       m_samples{0};
    std::jthread                                     m_thread;
};
}  // namespace hapi::sampler
