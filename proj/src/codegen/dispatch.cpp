#include "hapi/codegen/dispatch.hpp"

#include <fmt/format.h>

#include <cstring>

namespace hapi::codegen
{
namespace
{
using schema::FieldKind;
using trace::Address;
using trace::FieldValue;

const void* as_pointer(const ArgValue& v)
{
    if(const auto* p = std::get_if<void*>(&v)) return *p;
    if(const auto* s = std::get_if<const char*>(&v)) return *s;
    if(const auto* u = std::get_if<std::uint64_t>(&v))
        return reinterpret_cast<const void*>(static_cast<std::uintptr_t>(*u));
    return nullptr;
}

std::uint64_t as_bits(const ArgValue& v)
{
    return std::visit(
        [](const auto& x) -> std::uint64_t {
            using T = std::decay_t<decltype(x)>;
            if constexpr(std::is_same_v<T, double>)
                return static_cast<std::uint64_t>(x);
            else if constexpr(std::is_pointer_v<T>)
                return reinterpret_cast<std::uintptr_t>(x);
            else
                return static_cast<std::uint64_t>(x);
        },
        v);
}

FieldValue from_arg(FieldKind kind, const ArgValue& v)
{
    switch(kind)
    {
        case FieldKind::u64: return as_bits(v);
        case FieldKind::i64: return static_cast<std::int64_t>(as_bits(v));
        case FieldKind::f64:
            if(const auto* d = std::get_if<double>(&v)) return *d;
            return static_cast<double>(static_cast<std::int64_t>(as_bits(v)));
        case FieldKind::address: return Address{reinterpret_cast<std::uintptr_t>(as_pointer(v))};
        default: break;
    }
    return std::uint64_t{0};
}

/// Reads a `width`-byte value of `scalar` kind at `p` and widens it like the
/// C casts in the generated wrappers.
FieldValue read_memory(const void* p, std::uint32_t width, model::ScalarKind scalar, FieldKind kind)
{
    std::uint64_t raw = 0;
    if(p) std::memcpy(&raw, p, width);
    if(scalar == model::ScalarKind::f64)
    {
        if(width == 4)
        {
            float f;
            std::memcpy(&f, &raw, 4);
            return static_cast<double>(f);
        }
        double d;
        std::memcpy(&d, &raw, 8);
        return d;
    }
    if(scalar == model::ScalarKind::i64 && width < 8)
    {
        const auto shift = 64 - 8 * width;
        raw              = static_cast<std::uint64_t>(static_cast<std::int64_t>(raw << shift) >> shift);
    }
    switch(kind)
    {
        case FieldKind::i64: return static_cast<std::int64_t>(raw);
        case FieldKind::address: return Address{raw};
        case FieldKind::f64: return static_cast<double>(raw);
        default: return raw;
    }
}

trace::Blob read_bytes(const void* p, std::uint64_t n)
{
    if(!p) return {};
    n = std::min<std::uint64_t>(n, trace::capture_byte_cap);
    const auto* b = static_cast<const std::uint8_t*>(p);
    return trace::Blob(b, b + n);
}
}  // namespace

std::vector<FieldValue> capture_payload(const std::vector<Capture>& captures,
                                        std::span<const ArgValue> args, std::int64_t result)
{
    std::vector<FieldValue> out;
    out.reserve(captures.size());
    for(const auto& c : captures)
    {
        switch(c.source)
        {
            case CaptureSource::argument: out.push_back(from_arg(c.kind, args[c.param])); break;
            case CaptureSource::c_string:
            {
                const auto* s = static_cast<const char*>(as_pointer(args[c.param]));
                out.emplace_back(s ? std::string(s, ::strnlen(s, trace::capture_byte_cap)) : std::string());
                break;
            }
            case CaptureSource::result:
                out.push_back(from_arg(c.kind, ArgValue{result}));
                break;
            case CaptureSource::deref_value:
            case CaptureSource::struct_field:
            {
                const auto* base = static_cast<const std::uint8_t*>(as_pointer(args[c.param]));
                out.push_back(read_memory(base ? base + c.offset : nullptr, c.width, c.scalar, c.kind));
                break;
            }
            case CaptureSource::deref_bytes:
            {
                const std::uint64_t n = c.length_param ? as_bits(args[*c.length_param]) * c.element_size
                                                       : c.fixed_size;
                out.emplace_back(read_bytes(as_pointer(args[c.param]), n));
                break;
            }
        }
    }
    return out;
}

std::vector<FieldValue> profiling_payload(const ProfilingRecord& rec)
{
    return {rec.start_ns, rec.end_ns, rec.kind, rec.name, rec.device, rec.tile, rec.bytes, rec.groups};
}

DispatchTable::DispatchTable(const model::ApiModel& model, const schema::SchemaRegistry& registry,
                             ImplTable impls)
: m_plan(build_capture_plan(model, registry))
{
    for(std::size_t i = 0; i < model.functions.size(); ++i)
    {
        const auto& fn = model.functions[i];
        auto        it = impls.find(fn.name);
        if(it == impls.end())
            throw ModelError(fmt::format("dispatch: no implementation for '{}'", fn.name));
        m_entries.push_back(Entry{m_plan.functions[i], std::move(it->second), fn.params.size()});
    }
}

std::optional<std::size_t> DispatchTable::index_of(std::string_view name) const
{
    for(std::size_t i = 0; i < m_entries.size(); ++i)
        if(m_entries[i].plan.name == name) return i;
    return std::nullopt;
}

std::int64_t DispatchTable::invoke(const CallContext& ctx, std::size_t index,
                                   std::span<const ArgValue> args) const
{
    const auto& e = m_entries.at(index);
    if(args.size() != e.arity)
        throw Error(fmt::format("dispatch: '{}' takes {} arguments, got {}", e.plan.name, e.arity,
                                args.size()));
    auto* s = ctx.stream;
    if(!s) return e.impl(args).value;

    const auto& clock = ctx.clock ? *ctx.clock : s->writer().clock();
    if(s->enabled(e.plan.entry_id))
        s->emit(e.plan.entry_id, clock.now_ns(), capture_payload(e.plan.entry, args));
    auto r = e.impl(args);
    const auto t_exit = clock.now_ns();
    if(s->enabled(e.plan.exit_id))
        s->emit(e.plan.exit_id, t_exit, capture_payload(e.plan.exit, args, r.value));
    if(e.plan.profiling_id && s->enabled(*e.plan.profiling_id))
        for(const auto& rec : r.profiling) s->emit(*e.plan.profiling_id, t_exit, profiling_payload(rec));
    return r.value;
}

std::int64_t DispatchTable::invoke(const CallContext& ctx, std::string_view name,
                                   std::span<const ArgValue> args) const
{
    auto idx = index_of(name);
    if(!idx) throw UnknownFunction(std::string(name));
    return invoke(ctx, *idx, args);
}
}  // namespace hapi::codegen
