#pragma once

#include "hapi/pipeline/message.hpp"
#include "hapi/trace/reader.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace hapi::pipeline
{
/// An input whose timestamps go backwards.
class OrderingError : public TraceError
{
public:
    using TraceError::TraceError;
};

/// One per-stream event sequence.
class StreamInput
{
public:
    virtual ~StreamInput() = default;

    virtual const trace::StreamId& id() const = 0;
    /// Name used in errors (the file name for trace streams).
    virtual std::string name() const = 0;
    /// Byte offset (or index) of the record the next call returns.
    virtual std::uint64_t                     offset() const = 0;
    virtual std::optional<trace::EventRecord> next()         = 0;
};

/// Input over a finalized stream file.
std::unique_ptr<StreamInput> cursor_input(trace::StreamCursor cursor);

/// Input over records in memory; offsets are indices.
std::unique_ptr<StreamInput> vector_input(trace::StreamId id, std::vector<trace::EventRecord> records);

/// Merges inputs by timestamp. Ties go by (hostname, pid, tid, input index);
/// each input keeps its own order. Ends with one EndOfStream.
class Muxer final : public MessageSource
{
public:
    Muxer(const schema::SchemaRegistry& registry, std::vector<std::unique_ptr<StreamInput>> inputs);

    std::optional<Message> next() override;

    std::uint64_t events_out() const noexcept { return m_out; }

private:
    struct Head
    {
        trace::EventRecord record;
        std::uint64_t      offset = 0;
        std::size_t        input  = 0;
        const trace::StreamId* id = nullptr;  // owned by the input
    };

    struct Later
    {
        bool operator()(const Head& a, const Head& b) const;
    };

    void pull(std::size_t input);

    const schema::SchemaRegistry*                                  m_registry;
    std::vector<std::unique_ptr<StreamInput>>                      m_inputs;
    std::vector<std::uint64_t>                                     m_last_ts;
    std::vector<Head>                                              m_heap;  // heap ordered by Later
    std::uint64_t                                                  m_out  = 0;
    bool                                                           m_done = false;
};

/// Muxer over every stream of a finalized trace.
Muxer mux_trace(const trace::TraceReader& reader);
}  // namespace hapi::pipeline
