#pragma once

#include "hapi/pipeline/pipeline.hpp"

#include <ostream>
#include <string>

namespace hapi::sinks
{
/// `HH:MM:SS.nnnnnnnnn` of the time of day (hours wrap at 24).
std::string format_clock(std::uint64_t timestamp_ns);

/// One field value: decimal integers, `0x` + 16 hex digits for addresses,
/// JSON-quoted strings, `[ 0x.., 0x.. ]` for blobs.
std::string format_value(const trace::FieldValue& v);

/// `<clock> - <host> - vpid: P, vtid: T - <schema>: { f: v, ... }`
std::string format_event_line(const trace::StreamId& stream, const schema::EventSchema& schema,
                              const trace::EventRecord& record);

/// Writes one line per muxed event.
class PrettySink final : public pipeline::Sink
{
public:
    explicit PrettySink(std::ostream& out) : m_out(out) {}

    std::string_view name() const override { return "pretty"; }
    pipeline::Tap    tap() const override { return pipeline::Tap::muxed; }
    void             on_message(const pipeline::Message& msg) override;
    void             on_finish() override { m_out.flush(); }

private:
    std::ostream& m_out;
};
}  // namespace hapi::sinks
