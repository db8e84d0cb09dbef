#include "hapi/sinks/pretty.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hapi::sinks
{
std::string format_clock(std::uint64_t ts)
{
    const std::uint64_t secs = ts / 1'000'000'000;
    return fmt::format("{:02}:{:02}:{:02}.{:09}", (secs / 3600) % 24, (secs / 60) % 60, secs % 60,
                       ts % 1'000'000'000);
}

std::string format_value(const trace::FieldValue& v)
{
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr(std::is_same_v<T, trace::Address>)
                return fmt::format("0x{:016x}", x.value);
            else if constexpr(std::is_same_v<T, std::string>)
                return nlohmann::json(x).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
            else if constexpr(std::is_same_v<T, trace::Blob>)
            {
                std::string out = "[ ";
                for(std::size_t i = 0; i < x.size(); ++i)
                    out += fmt::format("{}0x{:02x}", i ? ", " : "", x[i]);
                return out + " ]";
            }
            else
                return fmt::format("{}", x);
        },
        v);
}

std::string format_event_line(const trace::StreamId& stream, const schema::EventSchema& schema,
                              const trace::EventRecord& record)
{
    std::string fields;
    for(std::size_t i = 0; i < record.payload.size(); ++i)
    {
        if(i) fields += ", ";
        fields += i < schema.fields.size() ? schema.fields[i].name : fmt::format("field{}", i);
        fields += ": ";
        fields += format_value(record.payload[i]);
    }
    return fmt::format("{} - {} - vpid: {}, vtid: {} - {}: {{ {} }}", format_clock(record.timestamp_ns),
                       stream.hostname, stream.pid, stream.tid, schema.name, fields);
}

void PrettySink::on_message(const pipeline::Message& msg)
{
    const auto* e = std::get_if<pipeline::EventMessage>(&msg);
    if(!e || !e->schema) return;
    m_out << format_event_line(e->stream, *e->schema, e->record) << '\n';
}
}  // namespace hapi::sinks
