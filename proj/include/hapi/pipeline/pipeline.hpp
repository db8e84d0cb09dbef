#pragma once

#include "hapi/error.hpp"
#include "hapi/pipeline/intervals.hpp"
#include "hapi/pipeline/message.hpp"
#include "hapi/trace/metadata.hpp"
#include "hapi/trace/reader.hpp"

#include <span>
#include <string>
#include <string_view>

namespace hapi::pipeline
{
/// Which point of the graph a sink listens to.
enum class Tap : std::uint8_t
{
    muxed,      // raw events in global time order
    intervals,  // spans, samples and pass-through events
};

struct PipelineContext
{
    const schema::SchemaRegistry&  registry;
    std::span<const trace::StreamInfo> streams;
    const trace::TraceMetadata*    metadata = nullptr;  // null for synthetic inputs
};

/// Sink plugin contract. Callbacks run on the pipeline's driver thread:
/// on_start once, on_message for every message at the sink's tap (the last
/// one is EndOfStream), then on_finish.
class Sink
{
public:
    virtual ~Sink() = default;

    virtual std::string_view name() const = 0;
    virtual Tap              tap() const { return Tap::intervals; }
    virtual void             on_start(const PipelineContext&) {}
    virtual void             on_message(const Message& msg) = 0;
    virtual void             on_finish() {}
};

/// A sink callback failed. Carries the sink's name.
class SinkError : public Error
{
public:
    SinkError(std::string sink, const std::string& what);

    const std::string& sink() const noexcept { return m_sink; }

private:
    std::string m_sink;
};

struct PipelineStats
{
    std::uint64_t           muxed_events = 0;
    FilterStats             intervals;
    std::vector<OrphanExit> orphans;
};

/// Drives `source` through the interval filter once, feeding every sink at
/// its tap.
PipelineStats run_pipeline(MessageSource& source, const PipelineContext& ctx, std::span<Sink* const> sinks);

/// Same over every stream of a finalized trace.
PipelineStats run_pipeline(const trace::TraceReader& reader, std::span<Sink* const> sinks);
}  // namespace hapi::pipeline
