#pragma once

#include "hapi/schema/schema.hpp"
#include "hapi/trace/event.hpp"
#include "hapi/trace/writer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hapi::pipeline
{
/// A decoded event together with where it came from.
struct EventMessage
{
    trace::StreamId            stream;
    std::size_t                input  = 0;  // muxer input index
    std::uint64_t              offset = 0;  // byte offset in its stream
    trace::EventRecord         record;
    const schema::EventSchema* schema = nullptr;
};

enum class SpanKind : std::uint8_t
{
    host_api,
    device_command,
};

using FieldMap = std::vector<std::pair<std::string, trace::FieldValue>>;

/// Looks up a field by name.
const trace::FieldValue* find_field(const FieldMap& fields, std::string_view name);

struct Span
{
    std::string     name;
    SpanKind        kind = SpanKind::host_api;
    trace::StreamId stream;
    std::uint64_t   start_ns = 0;
    std::uint64_t   end_ns   = 0;
    FieldMap        entry_payload;  // device spans: the profiling payload
    FieldMap        exit_payload;
    std::int64_t    result    = 0;
    bool            truncated = false;  // entry never saw its exit
    std::uint64_t   device    = 0;
    std::uint64_t   tile      = 0;

    std::uint64_t duration_ns() const noexcept { return end_ns - start_ns; }
};

struct TelemetrySample
{
    trace::StreamId stream;
    std::uint64_t   timestamp_ns = 0;
    schema::Counter counter      = schema::Counter::power_domain_0;
    std::uint64_t   device       = 0;
    double          value        = 0.0;
};

struct EndOfStream
{
};

using Message = std::variant<EventMessage, Span, TelemetrySample, EndOfStream>;

/// Pull interface shared by the muxer and filters.
class MessageSource
{
public:
    virtual ~MessageSource() = default;

    /// Next message, or nullopt after EndOfStream has been delivered.
    virtual std::optional<Message> next() = 0;
};

/// Payload as (field name, value) pairs in schema order.
FieldMap to_field_map(const schema::EventSchema& schema, const std::vector<trace::FieldValue>& payload);
}  // namespace hapi::pipeline
