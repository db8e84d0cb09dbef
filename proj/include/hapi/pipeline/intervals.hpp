#pragma once

#include "hapi/pipeline/message.hpp"

#include <deque>
#include <map>

namespace hapi::pipeline
{
/// An exit event with no open entry of the same function on its thread.
struct OrphanExit
{
    trace::StreamId stream;
    std::uint64_t   timestamp_ns = 0;
    std::uint64_t   offset       = 0;
    std::string     function;
};

/// Every event that enters a filter is passed, converted or counted as a
/// diagnostic, exactly once.
struct FilterStats
{
    std::uint64_t events_in   = 0;
    std::uint64_t passed      = 0;
    std::uint64_t converted   = 0;
    std::uint64_t diagnostics = 0;

    bool operator==(const FilterStats&) const = default;
};

/// Turns entry/exit pairs into host spans (LIFO by function name per
/// thread), profiling events into device spans and telemetry events into
/// samples. Meta events pass through. Entries still open at the end become
/// truncated spans ending at their stream's last timestamp.
class IntervalBuilder final : public MessageSource
{
public:
    IntervalBuilder(MessageSource& upstream, const schema::SchemaRegistry& registry);

    std::optional<Message> next() override;

    const FilterStats&             stats() const noexcept { return m_stats; }
    const std::vector<OrphanExit>& orphans() const noexcept { return m_orphans; }

private:
    struct Frame
    {
        std::string   function;
        std::uint64_t start_ns = 0;
        FieldMap      payload;
    };

    struct ThreadState
    {
        std::vector<Frame> frames;
        std::uint64_t      last_ts = 0;
    };

    void on_event(EventMessage&& e);
    void close_frame(const trace::StreamId& id, Frame&& f, std::uint64_t end, FieldMap exit,
                     std::int64_t result, bool truncated);
    void flush_open();

    MessageSource&                         m_upstream;
    const schema::SchemaRegistry*          m_registry;
    std::map<trace::StreamId, ThreadState> m_threads;
    std::deque<Message>                    m_ready;
    FilterStats                            m_stats;
    std::vector<OrphanExit>                m_orphans;
    bool                                   m_finished = false;
};
}  // namespace hapi::pipeline
