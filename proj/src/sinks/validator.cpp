#include "hapi/sinks/validator.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>

namespace hapi::sinks
{
namespace
{
using schema::FieldKind;
using schema::FieldOrigin;

std::uint64_t bits(const trace::FieldValue& v)
{
    if(const auto* u = std::get_if<std::uint64_t>(&v)) return *u;
    if(const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<std::uint64_t>(*i);
    if(const auto* a = std::get_if<trace::Address>(&v)) return a->value;
    return 0;
}

/// First field of `origin` holding an address.
std::optional<std::uint64_t> first_address(const pipeline::EventMessage& e, FieldOrigin origin)
{
    const auto& fields = e.schema->fields;
    for(std::size_t i = 0; i < fields.size() && i < e.record.payload.size(); ++i)
        if(fields[i].origin == origin && fields[i].kind == FieldKind::address) return bits(e.record.payload[i]);
    return std::nullopt;
}

std::int64_t result_of(const pipeline::EventMessage& e)
{
    if(auto i = e.schema->field_index("result"); i && *i < e.record.payload.size())
        return static_cast<std::int64_t>(bits(e.record.payload[*i]));
    return 0;
}

bool ends_with(std::string_view s, std::string_view suffix) { return s.ends_with(suffix); }

constexpr std::string_view execute_suffix = "CommandListExecute";
constexpr std::string_view reset_suffix   = "CommandListReset";
constexpr std::string_view pnext_suffix   = "_pNext";
}  // namespace

std::string_view to_string(Rule r)
{
    switch(r)
    {
        case Rule::uninit_pnext: return "uninit_pnext";
        case Rule::leaked_event: return "leaked_event";
        case Rule::cmdlist_not_reset: return "cmdlist_not_reset";
        case Rule::orphan_exit: return "orphan_exit";
    }
    return "?";
}

std::string format_finding(const ValidationFinding& f)
{
    return fmt::format("{}: {} [{} at {} ns on {}]", to_string(f.rule), f.message, f.function, f.timestamp_ns,
                       trace::stream_file_name(f.stream));
}

ValidatorSink::ValidatorSink(const model::ApiModel& model) : m_model(&model)
{
    for(const auto& fn : model.functions) m_attrs.emplace(fn.name, fn.attrs);
}

void ValidatorSink::on_start(const pipeline::PipelineContext& ctx)
{
    if(ctx.registry.fingerprint != model::model_fingerprint(*m_model))
        throw ModelError("the trace was not recorded from this API model");
    m_open.clear();
    m_open_handles.clear();
    m_live.clear();
    m_executed.clear();
    m_findings.clear();
}

void ValidatorSink::on_entry(const pipeline::EventMessage& e, const std::string& fn)
{
    const auto& fields = e.schema->fields;
    for(std::size_t i = 0; i < fields.size() && i < e.record.payload.size(); ++i)
    {
        if(fields[i].origin != FieldOrigin::deref_in || !ends_with(fields[i].name, pnext_suffix)) continue;
        const auto v = bits(e.record.payload[i]);
        if(v == 0) continue;
        m_findings.push_back({Rule::uninit_pnext, v, e.stream, e.record.timestamp_ns, fn,
                              fmt::format("{} is 0x{:016x}, not NULL", fields[i].name, v)});
    }

    const auto handle = first_address(e, FieldOrigin::stack_arg).value_or(0);
    auto       attrs  = m_attrs.find(fn);
    if(attrs != m_attrs.end() && attrs->second.has(model::FunctionAttr::releases_handle)) m_live.erase(handle);
    if(ends_with(fn, execute_suffix) && m_executed[handle])
        m_findings.push_back({Rule::cmdlist_not_reset, handle, e.stream, e.record.timestamp_ns, fn,
                              fmt::format("command list 0x{:016x} executed again without a reset", handle)});

    m_open[e.stream].push_back(fn);
    m_open_handles[e.stream].push_back(handle);
}

void ValidatorSink::on_exit(const pipeline::EventMessage& e, const std::string& fn)
{
    auto& stack   = m_open[e.stream];
    auto& handles = m_open_handles[e.stream];
    auto  it      = std::find(stack.rbegin(), stack.rend(), fn);
    if(it == stack.rend())
    {
        m_findings.push_back({Rule::orphan_exit, 0, e.stream, e.record.timestamp_ns, fn,
                              fmt::format("exit of {} without a matching entry", fn)});
        return;
    }
    const auto depth  = static_cast<std::size_t>(std::distance(it, stack.rend())) - 1;
    const auto handle = handles[depth];
    stack.resize(depth);
    handles.resize(depth);

    if(result_of(e) != 0) return;
    auto attrs = m_attrs.find(fn);
    if(attrs != m_attrs.end() && attrs->second.has(model::FunctionAttr::creates_handle))
        if(auto h = first_address(e, FieldOrigin::deref_out); h && *h)
            m_live.try_emplace(*h, Site{e.stream, e.record.timestamp_ns, fn});
    if(ends_with(fn, execute_suffix)) m_executed[handle] = true;
    if(ends_with(fn, reset_suffix)) m_executed[handle] = false;
}

void ValidatorSink::on_message(const pipeline::Message& msg)
{
    const auto* e = std::get_if<pipeline::EventMessage>(&msg);
    if(!e || !e->schema) return;
    if(e->schema->cls == schema::EventClass::host_entry)
        on_entry(*e, e->schema->function());
    else if(e->schema->cls == schema::EventClass::host_exit)
        on_exit(*e, e->schema->function());
}

void ValidatorSink::on_finish()
{
    for(const auto& [h, site] : m_live)
        m_findings.push_back({Rule::leaked_event, h, site.stream, site.timestamp_ns, site.function,
                              fmt::format("handle 0x{:016x} is never released", h)});
}
}  // namespace hapi::sinks
