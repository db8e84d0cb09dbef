#include "hapi/pipeline/intervals.hpp"

#include <algorithm>

namespace hapi::pipeline
{
namespace
{
std::uint64_t as_u64(const trace::FieldValue* v)
{
    if(!v) return 0;
    if(const auto* u = std::get_if<std::uint64_t>(v)) return *u;
    if(const auto* i = std::get_if<std::int64_t>(v)) return static_cast<std::uint64_t>(*i);
    if(const auto* a = std::get_if<trace::Address>(v)) return a->value;
    return 0;
}

std::string as_string(const trace::FieldValue* v)
{
    if(const auto* s = v ? std::get_if<std::string>(v) : nullptr) return *s;
    return {};
}
}  // namespace

IntervalBuilder::IntervalBuilder(MessageSource& upstream, const schema::SchemaRegistry& registry)
: m_upstream(upstream), m_registry(&registry)
{
}

std::optional<Message> IntervalBuilder::next()
{
    while(m_ready.empty())
    {
        if(m_finished) return std::nullopt;
        auto m = m_upstream.next();
        if(!m)
        {
            // Upstream ended without an explicit end marker.
            flush_open();
            m_ready.emplace_back(EndOfStream{});
            m_finished = true;
            continue;
        }
        if(auto* e = std::get_if<EventMessage>(&*m))
            on_event(std::move(*e));
        else if(std::holds_alternative<EndOfStream>(*m))
        {
            flush_open();
            m_ready.push_back(std::move(*m));
            m_finished = true;
        }
        else
            m_ready.push_back(std::move(*m));
    }
    auto out = std::move(m_ready.front());
    m_ready.pop_front();
    return out;
}

void IntervalBuilder::close_frame(const trace::StreamId& id, Frame&& f, std::uint64_t end, FieldMap exit,
                                  std::int64_t result, bool truncated)
{
    Span s;
    s.name          = std::move(f.function);
    s.kind          = SpanKind::host_api;
    s.stream        = id;
    s.start_ns      = f.start_ns;
    s.end_ns        = std::max(end, f.start_ns);
    s.entry_payload = std::move(f.payload);
    s.exit_payload  = std::move(exit);
    s.result        = result;
    s.truncated     = truncated;
    m_ready.emplace_back(std::move(s));
}

void IntervalBuilder::on_event(EventMessage&& e)
{
    ++m_stats.events_in;
    auto& thread   = m_threads[e.stream];
    thread.last_ts = std::max(thread.last_ts, e.record.timestamp_ns);

    const auto* schema = e.schema ? e.schema : m_registry->at(e.record.schema_id);
    if(!schema)
    {
        ++m_stats.passed;
        m_ready.emplace_back(std::move(e));
        return;
    }
    const auto ts = e.record.timestamp_ns;
    switch(schema->cls)
    {
        case schema::EventClass::host_entry:
            thread.frames.push_back(Frame{schema->function(), ts, to_field_map(*schema, e.record.payload)});
            ++m_stats.converted;
            return;
        case schema::EventClass::host_exit:
        {
            const auto fn = schema->function();
            auto&      fr = thread.frames;
            auto       it = std::find_if(fr.rbegin(), fr.rend(), [&](const Frame& f) { return f.function == fn; });
            if(it == fr.rend())
            {
                ++m_stats.diagnostics;
                m_orphans.push_back(OrphanExit{e.stream, ts, e.offset, fn});
                return;
            }
            ++m_stats.converted;
            const auto match = static_cast<std::size_t>(std::distance(it, fr.rend())) - 1;
            // Frames above the match never saw their exit.
            while(fr.size() > match + 1)
            {
                auto f = std::move(fr.back());
                fr.pop_back();
                close_frame(e.stream, std::move(f), ts, {}, 0, true);
            }
            auto f = std::move(fr.back());
            fr.pop_back();
            auto exit = to_field_map(*schema, e.record.payload);
            auto res  = static_cast<std::int64_t>(as_u64(find_field(exit, "result")));
            close_frame(e.stream, std::move(f), ts, std::move(exit), res, false);
            return;
        }
        case schema::EventClass::device_profiling:
        {
            ++m_stats.converted;
            auto fields = to_field_map(*schema, e.record.payload);
            Span s;
            s.name     = as_string(find_field(fields, "command_name"));
            s.kind     = SpanKind::device_command;
            s.stream   = e.stream;
            s.start_ns = as_u64(find_field(fields, "device_start_ns"));
            s.end_ns   = std::max(s.start_ns, as_u64(find_field(fields, "device_end_ns")));
            s.device   = as_u64(find_field(fields, "device"));
            s.tile     = as_u64(find_field(fields, "tile"));
            s.entry_payload = std::move(fields);
            m_ready.emplace_back(std::move(s));
            return;
        }
        case schema::EventClass::telemetry_sample:
        {
            auto counter = schema::counter_from_schema_name(schema->name);
            if(!counter) break;
            ++m_stats.converted;
            TelemetrySample t;
            t.stream       = e.stream;
            t.timestamp_ns = ts;
            t.counter      = *counter;
            if(!e.record.payload.empty()) t.device = as_u64(&e.record.payload[0]);
            if(e.record.payload.size() > 1)
                if(const auto* d = std::get_if<double>(&e.record.payload[1])) t.value = *d;
            m_ready.emplace_back(t);
            return;
        }
        case schema::EventClass::meta: break;
    }
    ++m_stats.passed;
    m_ready.emplace_back(std::move(e));
}

void IntervalBuilder::flush_open()
{
    for(auto& [id, thread] : m_threads)
    {
        // Innermost first, as an exit would have closed them.
        while(!thread.frames.empty())
        {
            auto f = std::move(thread.frames.back());
            thread.frames.pop_back();
            close_frame(id, std::move(f), thread.last_ts, {}, 0, true);
        }
    }
}
}  // namespace hapi::pipeline
