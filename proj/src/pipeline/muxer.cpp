#include "hapi/pipeline/muxer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <tuple>

namespace hapi::pipeline
{
namespace
{
class CursorInput final : public StreamInput
{
public:
    explicit CursorInput(trace::StreamCursor c) : m_cursor(std::move(c)) {}

    const trace::StreamId&            id() const override { return m_cursor.info().id; }
    std::string                       name() const override { return m_cursor.info().file; }
    std::uint64_t                     offset() const override { return m_cursor.offset(); }
    std::optional<trace::EventRecord> next() override { return m_cursor.next(); }

private:
    trace::StreamCursor m_cursor;
};

class VectorInput final : public StreamInput
{
public:
    VectorInput(trace::StreamId id, std::vector<trace::EventRecord> records)
    : m_id(std::move(id)), m_records(std::move(records))
    {
    }

    const trace::StreamId& id() const override { return m_id; }
    std::string            name() const override { return trace::stream_file_name(m_id); }
    std::uint64_t          offset() const override { return m_pos; }

    std::optional<trace::EventRecord> next() override
    {
        if(m_pos == m_records.size()) return std::nullopt;
        return std::move(m_records[m_pos++]);
    }

private:
    trace::StreamId                 m_id;
    std::vector<trace::EventRecord> m_records;
    std::size_t                     m_pos = 0;
};
}  // namespace

const trace::FieldValue* find_field(const FieldMap& fields, std::string_view name)
{
    for(const auto& [k, v] : fields)
        if(k == name) return &v;
    return nullptr;
}

FieldMap to_field_map(const schema::EventSchema& schema, const std::vector<trace::FieldValue>& payload)
{
    FieldMap out;
    out.reserve(payload.size());
    for(std::size_t i = 0; i < payload.size() && i < schema.fields.size(); ++i)
        out.emplace_back(schema.fields[i].name, payload[i]);
    return out;
}

std::unique_ptr<StreamInput> cursor_input(trace::StreamCursor cursor)
{
    return std::make_unique<CursorInput>(std::move(cursor));
}

std::unique_ptr<StreamInput> vector_input(trace::StreamId id, std::vector<trace::EventRecord> records)
{
    return std::make_unique<VectorInput>(std::move(id), std::move(records));
}

bool Muxer::Later::operator()(const Head& a, const Head& b) const
{
    // std heaps keep the greatest on top; "greater" means later here.
    return std::tie(a.record.timestamp_ns, a.id->hostname, a.id->pid, a.id->tid, a.input) >
           std::tie(b.record.timestamp_ns, b.id->hostname, b.id->pid, b.id->tid, b.input);
}

Muxer::Muxer(const schema::SchemaRegistry& registry, std::vector<std::unique_ptr<StreamInput>> inputs)
: m_registry(&registry), m_inputs(std::move(inputs)), m_last_ts(m_inputs.size(), 0)
{
    m_heap.reserve(m_inputs.size());
    for(std::size_t i = 0; i < m_inputs.size(); ++i) pull(i);
}

void Muxer::pull(std::size_t i)
{
    auto&      in     = *m_inputs[i];
    const auto offset = in.offset();
    auto       rec    = in.next();
    if(!rec) return;
    if(rec->timestamp_ns < m_last_ts[i])
        throw OrderingError(in.name(), offset,
                            fmt::format("timestamp {} precedes {}", rec->timestamp_ns, m_last_ts[i]));
    m_last_ts[i] = rec->timestamp_ns;
    m_heap.push_back(Head{std::move(*rec), offset, i, &in.id()});
    std::push_heap(m_heap.begin(), m_heap.end(), Later{});
}

std::optional<Message> Muxer::next()
{
    if(m_heap.empty())
    {
        if(m_done) return std::nullopt;
        m_done = true;
        return Message{EndOfStream{}};
    }
    std::pop_heap(m_heap.begin(), m_heap.end(), Later{});
    Head h = std::move(m_heap.back());
    m_heap.pop_back();
    pull(h.input);
    ++m_out;
    EventMessage msg{*h.id, h.input, h.offset, std::move(h.record), nullptr};
    msg.schema = m_registry->at(msg.record.schema_id);
    return Message{std::move(msg)};
}

Muxer mux_trace(const trace::TraceReader& reader)
{
    std::vector<std::unique_ptr<StreamInput>> inputs;
    for(std::size_t i = 0; i < reader.streams().size(); ++i) inputs.push_back(cursor_input(reader.cursor(i)));
    return Muxer(reader.registry(), std::move(inputs));
}
}  // namespace hapi::pipeline
