#include "hapi/trace/event.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>

namespace hapi::trace
{
using schema::FieldKind;

schema::FieldKind kind_of(const FieldValue& v) noexcept
{
    return static_cast<FieldKind>(v.index());
}

bool bitwise_equal(const FieldValue& a, const FieldValue& b) noexcept
{
    if(a.index() != b.index()) return false;
    if(const auto* da = std::get_if<double>(&a))
        return std::bit_cast<std::uint64_t>(*da) == std::bit_cast<std::uint64_t>(std::get<double>(b));
    return a == b;
}

bool bitwise_equal(const EventRecord& a, const EventRecord& b) noexcept
{
    if(a.schema_id != b.schema_id || a.timestamp_ns != b.timestamp_ns ||
       a.payload.size() != b.payload.size())
        return false;
    for(std::size_t i = 0; i < a.payload.size(); ++i)
        if(!bitwise_equal(a.payload[i], b.payload[i])) return false;
    return true;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for(int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for(int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) noexcept
{
    std::uint32_t v = 0;
    for(int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) noexcept
{
    std::uint64_t v = 0;
    for(int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void check_payload(const schema::EventSchema& schema, std::span<const FieldValue> payload)
{
    if(payload.size() != schema.fields.size())
        throw TraceError(fmt::format("payload for '{}' has {} fields, schema has {}", schema.name,
                                     payload.size(), schema.fields.size()));
    for(std::size_t i = 0; i < payload.size(); ++i)
    {
        const auto& f = schema.fields[i];
        if(kind_of(payload[i]) != f.kind)
            throw TraceError(fmt::format("payload for '{}': field '{}' is {}, expected {}",
                                         schema.name, f.name, schema::to_string(kind_of(payload[i])),
                                         schema::to_string(f.kind)));
        const auto* s = std::get_if<std::string>(&payload[i]);
        const auto* b = std::get_if<Blob>(&payload[i]);
        std::size_t len = s ? s->size() : b ? b->size() : 0;
        if(len > UINT32_MAX)
            throw TraceError(fmt::format("payload for '{}': field '{}' exceeds 4 GiB", schema.name,
                                         f.name));
    }
}

void encode_payload(const schema::EventSchema& schema, std::span<const FieldValue> payload,
                    std::vector<std::uint8_t>& out)
{
    check_payload(schema, payload);
    for(const auto& v : payload)
    {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr(std::is_same_v<T, std::uint64_t>)
                    put_u64(out, x);
                else if constexpr(std::is_same_v<T, std::int64_t>)
                    put_u64(out, static_cast<std::uint64_t>(x));
                else if constexpr(std::is_same_v<T, double>)
                    put_u64(out, std::bit_cast<std::uint64_t>(x));
                else if constexpr(std::is_same_v<T, Address>)
                    put_u64(out, x.value);
                else
                {
                    put_u32(out, static_cast<std::uint32_t>(x.size()));
                    out.insert(out.end(), x.begin(), x.end());
                }
            },
            v);
    }
}

void encode_record(const schema::EventSchema& schema, const EventRecord& rec,
                   std::vector<std::uint8_t>& out)
{
    check_payload(schema, rec.payload);
    const auto start = out.size();
    put_u32(out, rec.schema_id);
    put_u64(out, rec.timestamp_ns);
    put_u32(out, 0);
    encode_payload(schema, rec.payload, out);
    const auto len = static_cast<std::uint32_t>(out.size() - start - record_header_size);
    for(int i = 0; i < 4; ++i) out[start + 12 + i] = static_cast<std::uint8_t>(len >> (8 * i));
}

std::vector<FieldValue> decode_payload(const schema::EventSchema& schema,
                                       std::span<const std::uint8_t> bytes,
                                       const std::string& stream, std::uint64_t base_offset)
{
    std::vector<FieldValue> out;
    out.reserve(schema.fields.size());
    std::size_t at   = 0;
    auto        need = [&](std::size_t n, const schema::FieldSpec& f) {
        if(bytes.size() - at < n)
            throw TraceError(stream, base_offset + at,
                             fmt::format("truncated field '{}' of '{}'", f.name, schema.name));
    };
    for(const auto& f : schema.fields)
    {
        switch(f.kind)
        {
            case FieldKind::u64:
                need(8, f);
                out.emplace_back(get_u64(bytes.data() + at));
                at += 8;
                break;
            case FieldKind::i64:
                need(8, f);
                out.emplace_back(static_cast<std::int64_t>(get_u64(bytes.data() + at)));
                at += 8;
                break;
            case FieldKind::f64:
                need(8, f);
                out.emplace_back(std::bit_cast<double>(get_u64(bytes.data() + at)));
                at += 8;
                break;
            case FieldKind::address:
                need(8, f);
                out.emplace_back(Address{get_u64(bytes.data() + at)});
                at += 8;
                break;
            case FieldKind::string:
            case FieldKind::blob:
            {
                need(4, f);
                const std::size_t len = get_u32(bytes.data() + at);
                at += 4;
                need(len, f);
                const auto* p = bytes.data() + at;
                if(f.kind == FieldKind::string)
                    out.emplace_back(std::string(reinterpret_cast<const char*>(p), len));
                else
                    out.emplace_back(Blob(p, p + len));
                at += len;
                break;
            }
        }
    }
    if(at != bytes.size())
        throw TraceError(stream, base_offset + at,
                         fmt::format("{} trailing payload bytes in '{}'", bytes.size() - at,
                                     schema.name));
    return out;
}

DecodedRecord decode_record(const schema::SchemaRegistry& registry,
                            std::span<const std::uint8_t> bytes, const std::string& stream,
                            std::uint64_t base_offset)
{
    if(bytes.size() < record_header_size)
        throw TraceError(stream, base_offset, "truncated record header");
    DecodedRecord d;
    d.record.schema_id    = get_u32(bytes.data());
    d.record.timestamp_ns = get_u64(bytes.data() + 4);
    const std::size_t len = get_u32(bytes.data() + 12);
    if(bytes.size() - record_header_size < len)
        throw TraceError(stream, base_offset,
                         fmt::format("truncated record: payload length {} exceeds remaining {} bytes",
                                     len, bytes.size() - record_header_size));
    const auto* schema = registry.at(d.record.schema_id);
    if(!schema)
        throw TraceError(stream, base_offset,
                         fmt::format("unknown schema id {}", d.record.schema_id));
    d.record.payload = decode_payload(*schema, bytes.subspan(record_header_size, len), stream,
                                      base_offset + record_header_size);
    d.size           = record_header_size + len;
    return d;
}
}  // namespace hapi::trace
