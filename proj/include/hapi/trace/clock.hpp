#pragma once

#include <atomic>
#include <cstdint>
#include <string_view>

namespace hapi::trace
{
class ClockSource
{
public:
    virtual ~ClockSource() = default;

    virtual std::uint64_t    now_ns() const = 0;
    /// "virtual" or "monotonic-wall", recorded in trace metadata.
    virtual std::string_view kind() const = 0;
};

/// CLOCK_MONOTONIC in nanoseconds.
class MonotonicClock final : public ClockSource
{
public:
    std::uint64_t    now_ns() const override;
    std::string_view kind() const override { return "monotonic-wall"; }
};

/// A manually advanced clock. Never goes backwards.
class VirtualClock final : public ClockSource
{
public:
    explicit VirtualClock(std::uint64_t start_ns = 0) : m_now(start_ns) {}

    std::uint64_t    now_ns() const override { return m_now.load(std::memory_order_acquire); }
    std::string_view kind() const override { return "virtual"; }

    /// Moves forward by `delta_ns` and returns the new time.
    std::uint64_t advance(std::uint64_t delta_ns)
    {
        return m_now.fetch_add(delta_ns, std::memory_order_acq_rel) + delta_ns;
    }

    /// Moves to `t` if it is in the future.
    void advance_to(std::uint64_t t)
    {
        auto cur = m_now.load(std::memory_order_acquire);
        while(cur < t && !m_now.compare_exchange_weak(cur, t, std::memory_order_acq_rel))
        {
        }
    }

private:
    std::atomic<std::uint64_t> m_now;
};
}  // namespace hapi::trace
