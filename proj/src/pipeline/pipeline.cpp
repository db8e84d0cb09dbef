#include "hapi/pipeline/pipeline.hpp"

#include "hapi/pipeline/muxer.hpp"

#include <fmt/format.h>

namespace hapi::pipeline
{
namespace
{
template <typename F>
void guarded(Sink& sink, F&& f)
{
    try
    {
        f();
    } catch(const SinkError&)
    {
        throw;
    } catch(const std::exception& e)
    {
        throw SinkError(std::string(sink.name()), e.what());
    }
}

/// Forwards upstream messages while showing each one to the muxed-tap sinks.
class Tee final : public MessageSource
{
public:
    Tee(MessageSource& upstream, std::vector<Sink*> sinks) : m_upstream(upstream), m_sinks(std::move(sinks)) {}

    std::optional<Message> next() override
    {
        auto m = m_upstream.next();
        if(!m) return m;
        if(std::holds_alternative<EventMessage>(*m)) ++m_events;
        for(auto* s : m_sinks) guarded(*s, [&] { s->on_message(*m); });
        return m;
    }

    std::uint64_t events() const noexcept { return m_events; }

private:
    MessageSource&     m_upstream;
    std::vector<Sink*> m_sinks;
    std::uint64_t      m_events = 0;
};
}  // namespace

SinkError::SinkError(std::string sink, const std::string& what)
: Error(fmt::format("sink '{}': {}", sink, what)), m_sink(std::move(sink))
{
}

PipelineStats run_pipeline(MessageSource& source, const PipelineContext& ctx, std::span<Sink* const> sinks)
{
    std::vector<Sink*> muxed, spans;
    for(auto* s : sinks) (s->tap() == Tap::muxed ? muxed : spans).push_back(s);

    for(auto* s : sinks) guarded(*s, [&] { s->on_start(ctx); });

    Tee             tee(source, muxed);
    IntervalBuilder intervals(tee, ctx.registry);
    while(auto m = intervals.next())
        for(auto* s : spans) guarded(*s, [&] { s->on_message(*m); });

    for(auto* s : sinks) guarded(*s, [&] { s->on_finish(); });

    return PipelineStats{tee.events(), intervals.stats(), intervals.orphans()};
}

PipelineStats run_pipeline(const trace::TraceReader& reader, std::span<Sink* const> sinks)
{
    auto            mux = mux_trace(reader);
    PipelineContext ctx{reader.registry(), reader.streams(), &reader.metadata()};
    return run_pipeline(mux, ctx, sinks);
}
}  // namespace hapi::pipeline
